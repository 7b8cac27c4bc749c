from .schemas import (
    EpisodeIngestRequest,
    EpisodeIngestResponse,
    RetrieveRequest,
    RetrieveHit,
    RetrieveResponse,
    AugmentRequest,
    AugmentResponse,
    RecentSummaryResponse,
    StatsResponse,
    HealthResponse,
)

__all__ = [
    'EpisodeIngestRequest',
    'EpisodeIngestResponse',
    'RetrieveRequest',
    'RetrieveHit',
    'RetrieveResponse',
    'AugmentRequest',
    'AugmentResponse',
    'RecentSummaryResponse',
    'StatsResponse',
    'HealthResponse',
]
