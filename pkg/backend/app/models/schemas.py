from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from backend.app.core.distiller import ReflectionValidationReport
from backend.app.core.orbs import Trajectory
from backend.app.core.retriever import RetrievalRequest
from backend.app.services import IngestResult, RetrievedMemory


class EpisodeIngestRequest(BaseModel):
    trajectory: Trajectory
    memory_context: str = ""
    now: Optional[datetime] = Field(
        default=None,
        description="Ingest timestamp override; defaults to the server clock",
    )


class EpisodeIngestResponse(BaseModel):
    orb_id: str
    created: bool
    validation: ReflectionValidationReport

    @classmethod
    def from_result(cls, result: IngestResult) -> "EpisodeIngestResponse":
        return cls(orb_id=result.orb.id, created=result.created, validation=result.validation)


class RetrieveRequest(RetrievalRequest):
    pass


class RetrieveHit(BaseModel):
    orb_id: str
    outcome: str
    metadata: Dict[str, Any] = Field(default_factory=dict)
    score: float


class RetrieveResponse(BaseModel):
    hits: List[RetrieveHit] = Field(default_factory=list)
    k_requested: int

    @classmethod
    def from_memory(cls, memory: RetrievedMemory) -> "RetrieveResponse":
        return cls(
            hits=[
                RetrieveHit(orb_id=hit.orb_id, outcome=outcome, metadata=hit.metadata, score=hit.score)
                for hit, outcome in zip(memory.result.hits, memory.outcomes)
            ],
            k_requested=memory.result.k_requested,
        )


class AugmentRequest(RetrievalRequest):
    base: Optional[str] = None
    platform: str = ""
    shop_id: str = ""
    user_id: Optional[str] = None


class AugmentResponse(BaseModel):
    text: str
    injected_orb_ids: List[str] = Field(default_factory=list)


class RecentSummaryResponse(BaseModel):
    summary: str
    orb_ids: List[str] = Field(default_factory=list)


class StatsResponse(BaseModel):
    orb_count: int
    vector_count: int
    dim: int
    k_default: int
    cross_user: bool


class HealthResponse(BaseModel):
    status: str = "ok"
