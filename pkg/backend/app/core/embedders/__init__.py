from .base_embedder import BaseEmbedder, EmbeddingVector, DEFAULT_DIM, l2_normalize
from .hashing_embedder import HashingEmbedder, HASHING_SEED
from .remote_embedder import RemoteEmbedder
from .embedder_factory import EmbedderFactory, create_embedder

__all__ = [
    'BaseEmbedder',
    'EmbeddingVector',
    'DEFAULT_DIM',
    'l2_normalize',
    'HashingEmbedder',
    'HASHING_SEED',
    'RemoteEmbedder',
    'EmbedderFactory',
    'create_embedder',
]
