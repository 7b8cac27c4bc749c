import logging
import threading

import numpy as np
import pytest

from backend.app.core.llm_adapters import ScriptedLLMAdapter
from backend.app.core.orbs import orb_to_json
from backend.app.core.retriever import RetrievalRequest
from backend.app.core.stores import LOG_FILE
from backend.app.core.stores.vector_store import VECTOR_FILE
from backend.app.utils.exceptions import DimensionMismatchError
from backend.tests.conftest import FIXED_NOW, SUCCESS, build_engine, make_trajectory, staggered

QUERIES = [
    "refund for a damaged kettle",
    "change the delivery address",
    "coupon was not applied",
    "exchange shoes for a larger size",
    "parcel marked delivered but missing",
]


def episode(i: int, reward=None):
    kwargs = {"reward": reward} if reward is not None else {}
    return make_trajectory(
        [f"Case {i}: {QUERIES[i % len(QUERIES)]}.", "This is really frustrating."],
        user_id=f"user-{i % 37:03d}",
        scenario=QUERIES[i % len(QUERIES)],
        **kwargs
    )


def fill(engine, count: int, offset: int = 0):
    return [engine.ingest_episode(episode(offset + i), now=staggered(FIXED_NOW, offset + i)).orb for i in range(count)]


class TestIngest:
    def test_idempotent_with_fixed_now(self, engine):
        first = engine.ingest_episode(make_trajectory(), now=FIXED_NOW)
        second = engine.ingest_episode(make_trajectory(), now=FIXED_NOW)
        assert first.created is True
        assert second.created is False
        assert first.orb == second.orb
        assert engine.stats().orb_count == 1

    def test_ingest_log_reports_store_outcome(self, engine):
        records = []
        handler = logging.Handler()
        handler.emit = records.append
        engine.logger.addHandler(handler)
        level = engine.logger.level
        engine.logger.setLevel(logging.INFO)
        try:
            engine.ingest_episode(make_trajectory(), now=FIXED_NOW)
            engine.ingest_episode(make_trajectory(), now=FIXED_NOW)
        finally:
            engine.logger.removeHandler(handler)
            engine.logger.setLevel(level)

        ingested = [record for record in records if record.getMessage() == "Episode ingested"]
        assert [record.stored for record in ingested] == ["created", "updated"]
        assert all(isinstance(record.created, float) for record in ingested)

    def test_reingest_refreshes_timestamp(self, engine):
        engine.ingest_episode(make_trajectory(), now=FIXED_NOW)
        later = staggered(FIXED_NOW, 60)
        orb = engine.ingest_episode(make_trajectory(), now=later).orb
        assert engine.fetch_orb(orb.id).timestamp == later

    def test_stores_stay_aligned(self, engine):
        for i in range(500):
            engine.ingest_episode(episode(i % 150, reward=SUCCESS if i % 3 == 0 else None), now=staggered(FIXED_NOW, i))
            if i % 50 == 0:
                stats = engine.stats()
                assert stats.orb_count == stats.vector_count
        stats = engine.stats()
        assert stats.orb_count == stats.vector_count
        orbs, index = engine.snapshot_views()
        assert set(orbs) == set(index.ids)

    def test_malformed_reflection_is_kept_and_flagged(self):
        engine = build_engine(reflection_model=ScriptedLLMAdapter(default=lambda prompt: "Some thoughts without structure."))
        result = engine.ingest_episode(make_trajectory(), now=FIXED_NOW)
        assert not result.validation.ok
        assert engine.fetch_orb(result.orb.id) is not None

    def test_ingest_fills_log_before_publish(self, tmp_path):
        engine = build_engine(data_dir=tmp_path)
        orb = engine.ingest_episode(make_trajectory(), now=FIXED_NOW).orb
        assert (tmp_path / LOG_FILE).read_text(encoding="utf-8") == orb_to_json(orb) + "\n"


class TestRecentSummary:
    def test_empty(self, engine):
        summary = engine.recent_summary()
        assert summary.summary == ""
        assert summary.orb_ids == []

    def test_window(self, engine):
        orbs = fill(engine, 8)
        summary = engine.recent_summary(3)
        assert summary.orb_ids == [orb.id for orb in reversed(orbs[-3:])]
        assert summary.summary.startswith("Across the last 3 reflections")


class TestPersistence:
    @pytest.mark.slow
    def test_snapshot_and_load_round_trip(self, disk_engine_factory):
        engine = disk_engine_factory()
        orbs = fill(engine, 1000)
        engine.snapshot()

        reloaded = disk_engine_factory()
        report = reloaded.load()
        assert report.orb_count == report.vector_count == 1000
        assert report.dropped_vectors == []
        assert report.reembedded == []

        for orb in orbs[::97]:
            assert reloaded.fetch_orb(orb.id) == orb
        for query in QUERIES:
            request = RetrievalRequest(query=query, k=5)
            assert reloaded.retrieve(request) == engine.retrieve(request)

    def test_log_only_state_is_reembedded(self, disk_engine_factory):
        engine = disk_engine_factory()
        orbs = fill(engine, 5)

        reloaded = disk_engine_factory()
        report = reloaded.load()
        assert sorted(report.reembedded) == sorted(orb.id for orb in orbs)
        assert reloaded.stats().vector_count == 5
        request = RetrievalRequest(query=QUERIES[0])
        assert reloaded.retrieve(request) == engine.retrieve(request)

    def test_dangling_vector_dropped(self, disk_engine_factory, tmp_path):
        engine = disk_engine_factory()
        orbs = fill(engine, 3)
        engine.snapshot()

        log = tmp_path / "memory" / "orbs.snapshot.jsonl"
        lines = log.read_text(encoding="utf-8").splitlines()
        kept = [line for line in lines if orbs[0].id not in line]
        log.write_text("".join(line + "\n" for line in kept), encoding="utf-8")

        report = disk_engine_factory().load()
        assert report.dropped_vectors == [orbs[0].id]
        assert report.orb_count == report.vector_count == 2

    def test_dim_change_refuses_to_load(self, disk_engine_factory):
        engine = disk_engine_factory()
        fill(engine, 2)
        engine.snapshot()
        with pytest.raises(DimensionMismatchError):
            disk_engine_factory(dim=64).load()

    def test_vectors_written_only_on_snapshot(self, disk_engine_factory, tmp_path):
        engine = disk_engine_factory()
        fill(engine, 2)
        assert not (tmp_path / "memory" / VECTOR_FILE).exists()
        engine.snapshot()
        assert (tmp_path / "memory" / VECTOR_FILE).exists()


class TestConcurrency:
    def test_readers_never_see_half_published_orbs(self, engine):
        fill(engine, 20)
        errors = []
        stop = threading.Event()

        def reader():
            rng = np.random.default_rng()
            while not stop.is_set():
                orbs, index = engine.snapshot_views()
                if set(orbs) != set(index.ids):
                    errors.append("views diverged")
                memory = engine.retrieve(RetrievalRequest(query=QUERIES[int(rng.integers(len(QUERIES)))]))
                for hit, outcome in zip(memory.result.hits, memory.outcomes):
                    if engine.fetch_orb(hit.orb_id) is None or not outcome:
                        errors.append(f"missing orb {hit.orb_id}")

        threads = [threading.Thread(target=reader) for _ in range(4)]
        for thread in threads:
            thread.start()
        try:
            fill(engine, 200, offset=20)
        finally:
            stop.set()
            for thread in threads:
                thread.join(timeout=30)

        assert errors == []
        assert engine.stats().orb_count == 220

    def test_concurrent_writers(self, engine):
        def writer(start: int):
            fill(engine, 25, offset=start)

        threads = [threading.Thread(target=writer, args=(start,)) for start in range(0, 100, 25)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join(timeout=30)

        stats = engine.stats()
        assert stats.orb_count == stats.vector_count == 100
