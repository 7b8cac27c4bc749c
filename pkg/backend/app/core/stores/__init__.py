from .metadata_store import OrbStore, StoredFlag, check_orb_id, LOG_FILE, SNAPSHOT_FILE
from .vector_store import (
    FlatVectorStore,
    VectorRecord,
    RetrievalHit,
    RetrievalResult,
    IndexView,
    topk_from_view,
    encode_vectors,
    decode_vectors,
    VECTOR_FILE,
    FORMAT_VERSION,
)

__all__ = [
    'OrbStore',
    'StoredFlag',
    'check_orb_id',
    'LOG_FILE',
    'SNAPSHOT_FILE',
    'FlatVectorStore',
    'VectorRecord',
    'RetrievalHit',
    'RetrievalResult',
    'IndexView',
    'topk_from_view',
    'encode_vectors',
    'decode_vectors',
    'VECTOR_FILE',
    'FORMAT_VERSION',
]
