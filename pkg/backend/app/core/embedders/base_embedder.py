from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np

from backend.app.config import get_logger
from backend.app.utils.exceptions import DimensionMismatchError, InputValidationError

logger = get_logger(__name__)

DEFAULT_DIM = 768


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-length float32 vector; float32 is also the on-disk precision."""

    values: np.ndarray

    def __post_init__(self):
        array = np.ascontiguousarray(self.values, dtype=np.float32).reshape(-1)
        if array.size == 0:
            raise InputValidationError(message="Embedding vector must have dim >= 1")
        if not np.all(np.isfinite(array)):
            raise InputValidationError(message="Embedding vector has non-finite entries")
        array.setflags(write=False)
        object.__setattr__(self, "values", array)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values.astype(np.float64)))

    def dot(self, other: "EmbeddingVector") -> float:
        if other.dim != self.dim:
            raise DimensionMismatchError(
                message="Cannot compare vectors of different dimension",
                details={"left": self.dim, "right": other.dim}
            )
        return float(np.dot(self.values, other.values))

    def to_list(self) -> list:
        return self.values.tolist()

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "EmbeddingVector":
        return cls(np.asarray(values, dtype=np.float32))

    @classmethod
    def zeros(cls, dim: int) -> "EmbeddingVector":
        return cls(np.zeros(dim, dtype=np.float32))


def l2_normalize(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    norm = np.linalg.norm(values)
    if norm == 0.0:
        return values
    return values / norm


class BaseEmbedder(ABC):
    """
    Text -> vector. The same instance must serve indexing and querying,
    otherwise inner products across the two are meaningless.
    """

    def __init__(self, dim: int = DEFAULT_DIM, **kwargs):
        if dim < 1:
            raise InputValidationError(
                message="Embedding dimension must be >= 1",
                details={"dim": dim}
            )
        self.dim = dim
        self.config = kwargs
        self.logger = get_logger(self.__class__.__name__)

    @abstractmethod
    def embed(self, text: str) -> EmbeddingVector:
        pass

    @abstractmethod
    def get_embedder_info(self) -> Dict[str, Any]:
        pass

    def embed_many(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        return [self.embed(text) for text in texts]
