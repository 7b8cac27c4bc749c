from .memory_engine import (
    MemoryEngine,
    IngestResult,
    RetrievedMemory,
    RecentSummary,
    EngineStats,
    LoadReport,
    create_memory_engine,
)

__all__ = [
    'MemoryEngine',
    'IngestResult',
    'RetrievedMemory',
    'RecentSummary',
    'EngineStats',
    'LoadReport',
    'create_memory_engine',
]
