import json
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from backend.app.config import get_logger
from backend.app.core.embedders import EmbeddingVector
from backend.app.utils.exceptions import (
    DimensionMismatchError,
    FormatVersionMismatchError,
    InputValidationError,
    StorageIOError,
)
from backend.app.utils.file_utils import atomic_write_bytes, ensure_directory
from backend.app.utils.json_utils import compact_json

logger = get_logger(__name__)

VECTOR_FILE = "vectors.bin"
MAGIC = b"MORB"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sIIQ")
_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")


@dataclass(frozen=True)
class VectorRecord:
    orb_id: str
    document: str
    vector: EmbeddingVector
    metadata: Dict[str, Any] = field(default_factory=dict)


class RetrievalHit(BaseModel):
    model_config = ConfigDict(frozen=True)

    orb_id: str
    document: str
    metadata: Dict[str, Any] = Field(default_factory=dict)
    score: float


class RetrievalResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    hits: List[RetrievalHit] = Field(default_factory=list)
    k_requested: int = Field(ge=1)

    @property
    def orb_ids(self) -> List[str]:
        return [hit.orb_id for hit in self.hits]


class IndexView(NamedTuple):
    """Immutable point-in-time state of the flat index."""

    ids: Tuple[str, ...]
    documents: Tuple[str, ...]
    metadata: Tuple[Dict[str, Any], ...]
    matrix: np.ndarray
    positions: Dict[str, int]


def _empty_view(dim: int) -> IndexView:
    return IndexView((), (), (), np.zeros((0, dim), dtype=np.float32), {})


def topk_from_view(view: IndexView, query: EmbeddingVector, k: int) -> RetrievalResult:
    """
    Exact maximum-inner-product search. Order: score descending, then
    orb_id ascending, so results never depend on insertion order.
    """
    if k < 1:
        raise InputValidationError(message="k must be >= 1", details={"k": k})
    if query.dim != view.matrix.shape[1]:
        raise DimensionMismatchError(
            message="Query vector dimension does not match the index",
            details={"expected": int(view.matrix.shape[1]), "received": query.dim}
        )

    n = len(view.ids)
    if n == 0:
        return RetrievalResult(hits=[], k_requested=k)

    scores = view.matrix.astype(np.float64) @ query.values.astype(np.float64)

    if k < n:
        kth_score = np.partition(scores, n - k)[n - k]
        candidates = np.flatnonzero(scores >= kth_score).tolist()
    else:
        candidates = list(range(n))

    ranked = sorted(candidates, key=lambda i: (-scores[i], view.ids[i]))[:k]

    return RetrievalResult(
        hits=[
            RetrievalHit(
                orb_id=view.ids[i],
                document=view.documents[i],
                metadata=dict(view.metadata[i]),
                score=float(scores[i]),
            )
            for i in ranked
        ],
        k_requested=k,
    )


class FlatVectorStore:
    """
    Brute-force inner-product index over float32 rows.

    Copy-on-write: every mutation publishes a fresh IndexView, so a reader
    holding a view sees one consistent state for as long as it keeps it.
    """

    def __init__(
        self,
        dim: int = 768,
        data_dir: Optional[Union[str, Path]] = None,
        fsync: bool = True
    ):
        if dim < 1:
            raise InputValidationError(message="dim must be >= 1", details={"dim": dim})
        self.dim = dim
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.fsync = fsync
        self._lock = threading.RLock()
        self._view = _empty_view(dim)

        if self.data_dir is not None:
            ensure_directory(self.data_dir)

    @property
    def path(self) -> Optional[Path]:
        return self.data_dir / VECTOR_FILE if self.data_dir else None

    def __len__(self) -> int:
        return len(self._view.ids)

    def __contains__(self, orb_id: str) -> bool:
        return orb_id in self._view.positions

    def view(self) -> IndexView:
        return self._view

    def get_record(self, orb_id: str) -> Optional[VectorRecord]:
        view = self._view
        position = view.positions.get(orb_id)
        if position is None:
            return None
        return VectorRecord(
            orb_id=orb_id,
            document=view.documents[position],
            vector=EmbeddingVector(view.matrix[position]),
            metadata=dict(view.metadata[position]),
        )

    def add_embedding(self, record: VectorRecord) -> None:
        self.add_embeddings([record])

    def add_embeddings(self, records: Sequence[VectorRecord]) -> None:
        for record in records:
            self._check_dim(record.vector)

        with self._lock:
            self._view = self._merge(self._view, records)

    def retain(self, orb_ids: Iterable[str]) -> List[str]:
        """Drop every record whose id is not in `orb_ids`; returns the dropped ids."""
        keep = set(orb_ids)
        with self._lock:
            view = self._view
            dropped = [orb_id for orb_id in view.ids if orb_id not in keep]
            if dropped:
                rows = [i for i, orb_id in enumerate(view.ids) if orb_id in keep]
                self._view = self._build_view(
                    [view.ids[i] for i in rows],
                    [view.documents[i] for i in rows],
                    [view.metadata[i] for i in rows],
                    view.matrix[rows] if rows else np.zeros((0, self.dim), dtype=np.float32),
                )
        return dropped

    def query_topk(self, vector: EmbeddingVector, k: int, view: Optional[IndexView] = None) -> RetrievalResult:
        return topk_from_view(view if view is not None else self._view, vector, k)

    def _check_dim(self, vector: EmbeddingVector) -> None:
        if vector.dim != self.dim:
            raise DimensionMismatchError(
                message="Vector dimension does not match the store",
                details={"expected": self.dim, "received": vector.dim}
            )

    def _merge(self, view: IndexView, records: Sequence[VectorRecord]) -> IndexView:
        ids = list(view.ids)
        documents = list(view.documents)
        metadata = list(view.metadata)
        positions = dict(view.positions)
        replaced: Dict[int, np.ndarray] = {}
        appended: List[np.ndarray] = []

        for record in records:
            row = record.vector.values
            position = positions.get(record.orb_id)
            if position is None:
                positions[record.orb_id] = len(ids)
                ids.append(record.orb_id)
                documents.append(record.document)
                metadata.append(dict(record.metadata))
                appended.append(row)
            else:
                documents[position] = record.document
                metadata[position] = dict(record.metadata)
                if position < len(view.ids):
                    replaced[position] = row
                else:
                    appended[position - len(view.ids)] = row

        matrix = view.matrix
        if replaced:
            matrix = matrix.copy()
            for position, row in replaced.items():
                matrix[position] = row
        if appended:
            matrix = np.concatenate([matrix, np.vstack(appended)], axis=0)

        return self._build_view(ids, documents, metadata, matrix)

    def _build_view(self, ids, documents, metadata, matrix: np.ndarray) -> IndexView:
        matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        matrix.setflags(write=False)
        return IndexView(
            ids=tuple(ids),
            documents=tuple(documents),
            metadata=tuple(metadata),
            matrix=matrix,
            positions={orb_id: i for i, orb_id in enumerate(ids)},
        )

    def snapshot(self) -> None:
        if self.path is None:
            return
        view = self._view
        atomic_write_bytes(self.path, encode_vectors(view, self.dim), fsync=self.fsync)
        logger.info("Vector store snapshot written", path=str(self.path), vector_count=len(view.ids))

    def load(self) -> int:
        if self.path is None or not self.path.exists():
            return len(self)

        try:
            payload = self.path.read_bytes()
        except OSError as e:
            raise StorageIOError(
                message=f"Failed to read {VECTOR_FILE}: {e}",
                details={"path": str(self.path)}
            )

        records = decode_vectors(payload, self.dim)
        with self._lock:
            self._view = self._merge(_empty_view(self.dim), records)

        logger.info("Vector store loaded", path=str(self.path), vector_count=len(records))
        return len(records)


def encode_vectors(view: IndexView, dim: int) -> bytes:
    chunks = [_HEADER.pack(MAGIC, FORMAT_VERSION, dim, len(view.ids))]
    for i, orb_id in enumerate(view.ids):
        id_bytes = orb_id.encode("utf-8")
        doc_bytes = view.documents[i].encode("utf-8")
        meta_bytes = compact_json(view.metadata[i]).encode("utf-8")
        chunks.append(_U16.pack(len(id_bytes)))
        chunks.append(id_bytes)
        chunks.append(_U32.pack(len(doc_bytes)))
        chunks.append(doc_bytes)
        chunks.append(_U32.pack(len(meta_bytes)))
        chunks.append(meta_bytes)
        chunks.append(np.asarray(view.matrix[i], dtype="<f4").tobytes())
    return b"".join(chunks)


def decode_vectors(payload: bytes, dim: int) -> List[VectorRecord]:
    if len(payload) < _HEADER.size:
        raise StorageIOError(message=f"{VECTOR_FILE} is truncated (no header)")

    magic, version, file_dim, count = _HEADER.unpack_from(payload, 0)
    if magic != MAGIC:
        raise StorageIOError(
            message=f"{VECTOR_FILE} has a bad magic number",
            details={"magic": magic.hex()}
        )
    if version != FORMAT_VERSION:
        raise FormatVersionMismatchError(
            message=f"Unsupported {VECTOR_FILE} version {version}",
            details={"expected": FORMAT_VERSION, "found": version}
        )
    if file_dim != dim:
        raise DimensionMismatchError(
            message=f"{VECTOR_FILE} was written with dim {file_dim}",
            details={"expected": dim, "found": file_dim}
        )

    records = []
    offset = _HEADER.size
    vector_bytes = 4 * dim
    try:
        for _ in range(count):
            (id_len,) = _U16.unpack_from(payload, offset)
            offset += _U16.size
            orb_id = payload[offset:offset + id_len].decode("utf-8")
            offset += id_len

            (doc_len,) = _U32.unpack_from(payload, offset)
            offset += _U32.size
            document = payload[offset:offset + doc_len].decode("utf-8")
            offset += doc_len

            (meta_len,) = _U32.unpack_from(payload, offset)
            offset += _U32.size
            metadata = json.loads(payload[offset:offset + meta_len].decode("utf-8"))
            offset += meta_len

            if offset + vector_bytes > len(payload):
                raise ValueError("vector payload truncated")
            values = np.frombuffer(payload, dtype="<f4", count=dim, offset=offset)
            offset += vector_bytes

            records.append(VectorRecord(orb_id, document, EmbeddingVector(values), metadata))
    except (struct.error, UnicodeDecodeError, ValueError) as e:
        raise StorageIOError(
            message=f"{VECTOR_FILE} is corrupt: {e}",
            details={"records_read": len(records), "records_expected": count}
        )

    return records
