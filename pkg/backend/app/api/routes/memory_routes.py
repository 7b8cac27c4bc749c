from typing import Optional

from fastapi import APIRouter, Query, Request, status
from starlette.concurrency import run_in_threadpool

from backend.app.config import get_logger
from backend.app.core.orbs import Orb
from backend.app.core.retriever import RetrievalRequest
from backend.app.models import (
    AugmentRequest,
    AugmentResponse,
    EpisodeIngestRequest,
    EpisodeIngestResponse,
    RecentSummaryResponse,
    RetrieveRequest,
    RetrieveResponse,
    StatsResponse,
)
from backend.app.services import MemoryEngine
from backend.app.utils.exceptions import NotFoundError

router = APIRouter()
logger = get_logger(__name__)


def get_engine(request: Request) -> MemoryEngine:
    return request.app.state.engine


@router.post("/episodes", status_code=status.HTTP_200_OK, response_model=EpisodeIngestResponse)
async def ingest_episode(body: EpisodeIngestRequest, request: Request) -> EpisodeIngestResponse:
    engine = get_engine(request)
    result = await run_in_threadpool(
        engine.ingest_episode, body.trajectory, body.memory_context, body.now
    )
    return EpisodeIngestResponse.from_result(result)


@router.post("/retrieve", status_code=status.HTTP_200_OK, response_model=RetrieveResponse)
async def retrieve_orbs(body: RetrieveRequest, request: Request) -> RetrieveResponse:
    engine = get_engine(request)
    memory = await run_in_threadpool(engine.retrieve, body)
    return RetrieveResponse.from_memory(memory)


@router.post("/augment", status_code=status.HTTP_200_OK, response_model=AugmentResponse)
async def augment_prompt(body: AugmentRequest, request: Request) -> AugmentResponse:
    engine = get_engine(request)
    retrieval = RetrievalRequest(
        query=body.query,
        context=body.context,
        k=body.k,
        requesting_user=body.requesting_user or body.user_id,
    )
    augmented = await run_in_threadpool(
        engine.augment,
        retrieval,
        body.base,
        body.platform,
        body.shop_id,
        body.user_id,
    )
    return AugmentResponse(text=augmented.text, injected_orb_ids=augmented.injected_orb_ids)


@router.get("/orbs/{orb_id}", status_code=status.HTTP_200_OK, response_model=Orb)
async def get_orb(orb_id: str, request: Request) -> Orb:
    orb = get_engine(request).fetch_orb(orb_id)
    if orb is None:
        logger.info("Orb not found", orb_id=orb_id)
        raise NotFoundError(message=f"Orb {orb_id} not found", details={"orb_id": orb_id})
    return orb


@router.get("/reflections/recent", status_code=status.HTTP_200_OK, response_model=RecentSummaryResponse)
async def recent_reflections(
    request: Request,
    m: Optional[int] = Query(default=None, ge=1)
) -> RecentSummaryResponse:
    engine = get_engine(request)
    summary = await run_in_threadpool(engine.recent_summary, m)
    return RecentSummaryResponse(summary=summary.summary, orb_ids=summary.orb_ids)


@router.get("/stats", status_code=status.HTTP_200_OK, response_model=StatsResponse)
async def memory_stats(request: Request) -> StatsResponse:
    return StatsResponse(**get_engine(request).stats().model_dump())
