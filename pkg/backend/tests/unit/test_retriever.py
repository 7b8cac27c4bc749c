import numpy as np
import pytest
from pydantic import ValidationError

from backend.app.core.distiller import SUCCESS_PREFIX, validate_reflection
from backend.app.core.llm_adapters import RecordingLLMAdapter, build_scripted_backend
from backend.app.core.orbs import render_document
from backend.app.core.retriever import (
    MEMORY_HEADER,
    RetrievalRequest,
    augment_prompt,
    effective_k,
    retrieve,
    rewrite_query,
)
from backend.app.core.stores import FlatVectorStore, RetrievalHit, RetrievalResult
from backend.app.utils.exceptions import AlignmentMismatchError, InputValidationError
from backend.tests.conftest import FIXED_NOW, SUCCESS, build_engine, make_trajectory, staggered

SCENARIOS = [
    "Customer wants a refund for a damaged kettle.",
    "Customer asks to change the delivery address of an unshipped order.",
    "Customer reports a missing item in a bundle of socks.",
    "Customer wants to exchange running shoes for a larger size.",
    "Customer asks why a coupon was not applied at checkout.",
]


def populate(engine, count: int):
    orbs = []
    for i in range(count):
        trajectory = make_trajectory(
            [f"Order {i}: {SCENARIOS[i % len(SCENARIOS)]}", f"Still waiting on case {i}."],
            user_id=f"user-{i:03d}",
            scenario=SCENARIOS[i % len(SCENARIOS)],
        )
        orbs.append(engine.ingest_episode(trajectory, now=staggered(FIXED_NOW, i)).orb)
    return orbs


def oracle_ids(embedder, orbs, query: str, k: int):
    q = embedder.embed(query).values.astype(np.float32).astype(np.float64)
    scored = []
    for orb in orbs:
        row = embedder.embed(render_document(orb)).values.astype(np.float32).astype(np.float64)
        scored.append((-float(row @ q), orb.id))
    return [orb_id for _, orb_id in sorted(scored)[:k]]


class TestRewrite:
    def test_context_reaches_model(self):
        recorder = RecordingLLMAdapter(build_scripted_backend())
        rewritten = rewrite_query(recorder, "where is my parcel", "ordered last week")
        assert "where is my parcel\nDialogue context:\nordered last week" in recorder.last_prompt
        assert rewritten == "where is my parcel"

    def test_empty_context_omitted(self):
        recorder = RecordingLLMAdapter(build_scripted_backend())
        rewrite_query(recorder, "where is my parcel")
        assert "Dialogue context" not in recorder.last_prompt

    def test_empty_query(self):
        with pytest.raises(InputValidationError):
            rewrite_query(build_scripted_backend(), "")

    def test_blank_request_rejected(self):
        with pytest.raises(ValidationError):
            RetrievalRequest(query="   ")


class TestEffectiveK:
    def test_default(self):
        assert effective_k(RetrievalRequest(query="q")) == 5

    def test_explicit(self):
        assert effective_k(RetrievalRequest(query="q", k=3), k_default=5) == 3

    def test_ablation_forces_single_orb(self):
        assert effective_k(RetrievalRequest(query="q", k=7), cross_user=False) == 1


class TestRetrieve:
    def test_empty_store(self, embedder):
        store = FlatVectorStore(dim=embedder.dim)
        result = retrieve(RetrievalRequest(query="refund"), build_scripted_backend(), embedder, store)
        assert result.hits == []
        assert result.k_requested == 5

    def test_self_retrieval(self, engine):
        orbs = populate(engine, 10)
        target = orbs[3]
        memory = engine.retrieve(RetrievalRequest(query=render_document(target)))
        assert memory.result.hits[0].orb_id == target.id
        assert memory.result.hits[0].score == pytest.approx(1.0, abs=1e-5)
        assert memory.outcomes[0] == target.outcome

    def test_matches_brute_force(self, engine):
        orbs = populate(engine, 20)
        for query in ["refund for a damaged kettle", "larger running shoes", "coupon at checkout", "missing socks"]:
            memory = engine.retrieve(RetrievalRequest(query=query, k=5))
            assert memory.result.orb_ids == oracle_ids(engine.embedder, orbs, query, 5)

    def test_ablation_returns_one_hit(self):
        engine = build_engine(cross_user=False)
        populate(engine, 8)
        memory = engine.retrieve(RetrievalRequest(query="refund for a damaged kettle", k=5))
        assert len(memory.result.hits) == 1
        assert memory.result.k_requested == 1

    def test_other_users_memories_are_reachable(self, engine):
        orb = engine.ingest_episode(make_trajectory(user_id="user-001"), now=FIXED_NOW).orb
        memory = engine.retrieve(RetrievalRequest(query="refund for a dented kettle", requesting_user="user-002"))
        assert orb.id in memory.result.orb_ids


def hit(orb_id: str, score: float) -> RetrievalHit:
    return RetrievalHit(orb_id=orb_id, document="doc", score=score)


class TestAugmentPrompt:
    def test_no_hits_returns_base(self):
        augmented = augment_prompt("BASE", RetrievalResult(hits=[], k_requested=5), [])
        assert augmented.text == "BASE"
        assert augmented.injected_orb_ids == []

    def test_rank_order(self):
        result = RetrievalResult(hits=[hit("a" * 64, 0.9), hit("b" * 64, 0.5)], k_requested=5)
        augmented = augment_prompt("BASE", result, ["first lesson", "second lesson"])
        assert augmented.text == (
            f"{MEMORY_HEADER}\n- [aaaaaaaa] first lesson\n- [bbbbbbbb] second lesson\n\nBASE"
        )
        assert augmented.injected_orb_ids == ["a" * 64, "b" * 64]

    def test_alignment_mismatch(self):
        result = RetrievalResult(hits=[hit("a" * 64, 0.9)], k_requested=5)
        with pytest.raises(AlignmentMismatchError):
            augment_prompt("BASE", result, [])


def test_failure_then_success_carries_new_plan(engine):
    failed = engine.ingest_episode(make_trajectory(), now=FIXED_NOW)
    assert failed.validation.ok

    request = RetrievalRequest(query="My kettle arrived dented, I want a refund.", requesting_user="user-002")
    augmented = engine.augment(request, platform="test-mall", shop_id="shop-001")
    assert augmented.text.startswith(MEMORY_HEADER)
    assert failed.orb.id in augmented.injected_orb_ids
    assert "New Plan:" in augmented.text
    assert "the user_id of the customer you serve is user-002." in augmented.text

    memory_block = augmented.text.split("\n\n", 1)[0]
    retried = engine.ingest_episode(
        make_trajectory(["My kettle arrived dented.", "Great, thank you!"], reward=SUCCESS, user_id="user-002"),
        memory_context=memory_block,
        now=staggered(FIXED_NOW, 1),
    )
    assert retried.created
    assert retried.orb.outcome.startswith(SUCCESS_PREFIX)
    assert validate_reflection(retried.orb.outcome, success=True).ok
    assert engine.stats().orb_count == 2
