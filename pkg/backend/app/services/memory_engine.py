import threading
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from backend.app.config import Settings, get_logger
from backend.app.core.distiller import (
    BaseEmotionTagger,
    ReflectionValidationReport,
    default_tagger,
    generate_orb,
    reflect_over_recent,
    validate_reflection,
)
from backend.app.core.embedders import BaseEmbedder, EmbedderFactory
from backend.app.core.llm_adapters import BaseLLMAdapter, LLMAdapterFactory
from backend.app.core.orbs import Orb, Trajectory, render_document, utc_now
from backend.app.core.prompts import PromptLibrary, default_prompts
from backend.app.core.retriever import (
    AugmentedPrompt,
    RetrievalRequest,
    augment_prompt,
    render_system_prompt,
    retrieve,
)
from backend.app.core.stores import (
    FlatVectorStore,
    IndexView,
    OrbStore,
    RetrievalResult,
    StoredFlag,
    VectorRecord,
)

logger = get_logger(__name__)


class IngestResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    orb: Orb
    created: bool
    validation: ReflectionValidationReport


class RetrievedMemory(BaseModel):
    """A retrieval result together with the outcome text of every hit, read from one snapshot."""

    model_config = ConfigDict(frozen=True)

    result: RetrievalResult
    outcomes: List[str] = Field(default_factory=list)


class RecentSummary(BaseModel):
    summary: str
    orb_ids: List[str] = Field(default_factory=list)


class EngineStats(BaseModel):
    orb_count: int
    vector_count: int
    dim: int
    k_default: int
    cross_user: bool


class LoadReport(BaseModel):
    orb_count: int
    vector_count: int
    dropped_vectors: List[str] = Field(default_factory=list)
    reembedded: List[str] = Field(default_factory=list)


def vector_metadata(orb: Orb) -> Dict[str, Any]:
    metadata = dict(orb.context)
    metadata["emotion"] = orb.emotion
    return metadata


class MemoryEngine:
    """
    Dual-store memory bank: orb rows plus their embeddings.

    One writer at a time goes through `_write_lock`. The orb row and its
    vector are published together under `_publish_lock`, which readers take
    only long enough to capture both views, so a reader sees an orb either
    fully indexed or not at all.
    """

    def __init__(
        self,
        reflection_model: BaseLLMAdapter,
        embedder: BaseEmbedder,
        rewrite_model: Optional[BaseLLMAdapter] = None,
        tagger: BaseEmotionTagger = default_tagger,
        prompts: PromptLibrary = default_prompts,
        data_dir: Optional[Union[str, Path]] = None,
        k_default: int = 5,
        cross_user: bool = True,
        reflection_window: int = 5,
        fsync: bool = True
    ):
        self.logger = logger
        self.reflection_model = reflection_model
        self.rewrite_model = rewrite_model or reflection_model
        self.embedder = embedder
        self.tagger = tagger
        self.prompts = prompts
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.k_default = k_default
        self.cross_user = cross_user
        self.reflection_window = reflection_window

        self.orb_store = OrbStore(self.data_dir, fsync=fsync)
        self.vector_store = FlatVectorStore(embedder.dim, self.data_dir, fsync=fsync)

        self._write_lock = threading.RLock()
        self._publish_lock = threading.Lock()

        self.logger.info(
            "Memory engine initialized",
            data_dir=str(self.data_dir) if self.data_dir else "in-memory",
            dim=self.dim,
            k_default=k_default,
            cross_user=cross_user,
        )

    @classmethod
    def from_settings(
        cls,
        settings: Settings,
        in_memory: bool = False,
        reflection_model: Optional[BaseLLMAdapter] = None,
        embedder: Optional[BaseEmbedder] = None
    ) -> "MemoryEngine":
        return cls(
            reflection_model=reflection_model or LLMAdapterFactory.from_settings(settings),
            embedder=embedder or EmbedderFactory.from_settings(settings),
            data_dir=None if in_memory else settings.data_path,
            k_default=settings.TOPK_DEFAULT,
            cross_user=settings.CROSS_USER,
            reflection_window=settings.REFLECTION_WINDOW,
            fsync=settings.STORE_FSYNC,
        )

    @property
    def dim(self) -> int:
        return self.embedder.dim

    def snapshot_views(self) -> Tuple[Mapping[str, Orb], IndexView]:
        with self._publish_lock:
            return self.orb_store.view(), self.vector_store.view()

    def ingest_episode(
        self,
        trajectory: Trajectory,
        memory_context: str = "",
        now: Optional[datetime] = None
    ) -> IngestResult:
        orb = generate_orb(
            trajectory,
            self.reflection_model,
            memory_context,
            now or utc_now(),
            tagger=self.tagger,
            prompts=self.prompts,
        )
        validation = validate_reflection(orb.outcome, trajectory.final_reward.success)
        document = render_document(orb)
        record = VectorRecord(
            orb_id=orb.id,
            document=document,
            vector=self.embedder.embed(document),
            metadata=vector_metadata(orb),
        )

        with self._write_lock:
            self.orb_store.append_to_log(orb)
            with self._publish_lock:
                flag = self.orb_store.commit(orb)
                self.vector_store.add_embedding(record)

        if not validation.ok:
            self.logger.warning("Reflection failed shape validation", orb_id=orb.id, errors=validation.errors)

        self.logger.info(
            "Episode ingested",
            orb_id=orb.id,
            stored=flag.value,
            user_id=trajectory.user_id,
        )
        return IngestResult(orb=orb, created=flag is StoredFlag.CREATED, validation=validation)

    def retrieve(self, request: RetrievalRequest) -> RetrievedMemory:
        orbs, index = self.snapshot_views()
        result = retrieve(
            request,
            self.rewrite_model,
            self.embedder,
            self.vector_store,
            k_default=self.k_default,
            cross_user=self.cross_user,
            view=index,
            prompts=self.prompts,
        )
        outcomes = []
        for hit in result.hits:
            orb = orbs.get(hit.orb_id)
            outcomes.append(orb.outcome if orb is not None else hit.document)
        return RetrievedMemory(result=result, outcomes=outcomes)

    def augment(
        self,
        request: RetrievalRequest,
        base: Optional[str] = None,
        platform: str = "",
        shop_id: str = "",
        user_id: Optional[str] = None
    ) -> AugmentedPrompt:
        if base is None:
            base = render_system_prompt(
                platform,
                shop_id,
                user_id or request.requesting_user or "",
                prompts=self.prompts,
            )
        memory = self.retrieve(request)
        return augment_prompt(base, memory.result, memory.outcomes)

    def fetch_orb(self, orb_id: str) -> Optional[Orb]:
        return self.orb_store.fetch_orb(orb_id)

    def recent_summary(self, m: Optional[int] = None) -> RecentSummary:
        m = m or self.reflection_window
        recent = self.orb_store.recent(m)
        summary = reflect_over_recent(self.reflection_model, recent, m, prompts=self.prompts)
        return RecentSummary(summary=summary, orb_ids=[orb.id for orb in recent])

    def stats(self) -> EngineStats:
        orbs, index = self.snapshot_views()
        return EngineStats(
            orb_count=len(orbs),
            vector_count=len(index.ids),
            dim=self.dim,
            k_default=self.k_default,
            cross_user=self.cross_user,
        )

    def snapshot(self) -> None:
        with self._write_lock:
            self.orb_store.snapshot()
            self.vector_store.snapshot()

    def load(self) -> LoadReport:
        """
        Reload both stores from disk, then reconcile them: vectors without
        an orb are dropped and orbs whose vector is missing or stale are
        re-embedded.
        """
        with self._write_lock:
            self.orb_store.load()
            self.vector_store.load()

            orbs = self.orb_store.view()
            dropped = self.vector_store.retain(orbs.keys())
            for orb_id in dropped:
                self.logger.warning("Dropped dangling vector", orb_id=orb_id)

            stale = []
            for orb_id in sorted(orbs):
                document = render_document(orbs[orb_id])
                current = self.vector_store.get_record(orb_id)
                if current is None or current.document != document:
                    stale.append((orbs[orb_id], document))

            vectors = self.embedder.embed_many([document for _, document in stale])
            repairs = [
                VectorRecord(orb_id=orb.id, document=document, vector=vector, metadata=vector_metadata(orb))
                for (orb, document), vector in zip(stale, vectors)
            ]
            if repairs:
                self.vector_store.add_embeddings(repairs)
                self.logger.info("Re-embedded orbs on load", count=len(repairs))

        report = LoadReport(
            orb_count=len(self.orb_store),
            vector_count=len(self.vector_store),
            dropped_vectors=dropped,
            reembedded=[record.orb_id for record in repairs],
        )
        self.logger.info("Memory engine loaded", orb_count=report.orb_count, vector_count=report.vector_count)
        return report

    def close(self) -> None:
        for component in {id(c): c for c in (self.reflection_model, self.rewrite_model, self.embedder)}.values():
            closer = getattr(component, "close", None)
            if callable(closer):
                closer()


def create_memory_engine(settings: Settings, in_memory: bool = False, **kwargs) -> MemoryEngine:
    return MemoryEngine.from_settings(settings, in_memory=in_memory, **kwargs)
