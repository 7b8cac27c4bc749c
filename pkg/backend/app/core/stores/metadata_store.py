import threading
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Union

from backend.app.config import get_logger
from backend.app.core.orbs import Orb, is_orb_id, orb_from_json, orb_to_json
from backend.app.utils.exceptions import (
    InvalidOrbError,
    MalformedOrbIdError,
    StorageIOError,
)
from backend.app.utils.file_utils import (
    append_line,
    atomic_write_bytes,
    drop_last_line,
    ensure_directory,
    ensure_trailing_newline,
    read_lines,
    truncate_file,
)

logger = get_logger(__name__)

LOG_FILE = "orbs.jsonl"
SNAPSHOT_FILE = "orbs.snapshot.jsonl"


class StoredFlag(str, Enum):
    CREATED = "created"
    UPDATED = "updated"


def check_orb_id(orb_id: str) -> str:
    if not isinstance(orb_id, str) or not is_orb_id(orb_id):
        raise MalformedOrbIdError(
            message="Orb id must be 64 lowercase hex characters",
            details={"orb_id": str(orb_id)[:80]}
        )
    return orb_id


def _parse_record(line: str) -> Orb:
    try:
        line.encode("utf-8")
    except UnicodeEncodeError as e:
        raise InvalidOrbError(message=f"Invalid UTF-8 in orb record: {e}", details={"error": str(e)})
    return orb_from_json(line)


class OrbStore:
    """
    Orb rows keyed by id with upsert semantics.

    Persistence is an append-only JSONL log (last write per id wins on
    replay) plus an optional compacted snapshot. Writes go through one lock;
    readers get an immutable point-in-time mapping and never take the lock.
    With `data_dir=None` the store lives in memory only.
    """

    def __init__(self, data_dir: Optional[Union[str, Path]] = None, fsync: bool = True):
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.fsync = fsync
        self._lock = threading.RLock()
        self._orbs: Dict[str, Orb] = {}

        if self.data_dir is not None:
            ensure_directory(self.data_dir)

    @property
    def log_path(self) -> Optional[Path]:
        return self.data_dir / LOG_FILE if self.data_dir else None

    @property
    def snapshot_path(self) -> Optional[Path]:
        return self.data_dir / SNAPSHOT_FILE if self.data_dir else None

    def __len__(self) -> int:
        return len(self._orbs)

    def view(self) -> Mapping[str, Orb]:
        return MappingProxyType(self._orbs)

    def save_orb(self, orb: Orb) -> StoredFlag:
        with self._lock:
            self.append_to_log(orb)
            return self.commit(orb)

    def append_to_log(self, orb: Orb) -> None:
        if self.log_path is not None:
            append_line(self.log_path, orb_to_json(orb), fsync=self.fsync)

    def commit(self, orb: Orb) -> StoredFlag:
        with self._lock:
            flag = StoredFlag.UPDATED if orb.id in self._orbs else StoredFlag.CREATED
            published = dict(self._orbs)
            published[orb.id] = orb
            self._orbs = published

        logger.debug("Orb committed", orb_id=orb.id, flag=flag.value)
        return flag

    def fetch_orb(self, orb_id: str) -> Optional[Orb]:
        return self._orbs.get(check_orb_id(orb_id))

    def recent(self, m: int) -> List[Orb]:
        """Newest first, by timestamp then id."""
        ordered = sorted(self._orbs.values(), key=lambda orb: (orb.timestamp, orb.id), reverse=True)
        return ordered[:max(m, 0)]

    def load(self) -> int:
        if self.data_dir is None:
            return len(self)

        loaded: Dict[str, Orb] = {}
        for path in (self.snapshot_path, self.log_path):
            if path.exists():
                self._replay(path, loaded)

        with self._lock:
            self._orbs = loaded

        logger.info("Orb store loaded", data_dir=str(self.data_dir), orb_count=len(loaded))
        return len(loaded)

    def _replay(self, path: Path, into: Dict[str, Orb]) -> None:
        lines = [line for line in read_lines(path) if line.strip()]
        for position, line in enumerate(lines):
            try:
                orb = _parse_record(line)
            except InvalidOrbError as e:
                if position == len(lines) - 1 and path == self.log_path:
                    # a torn final append from a crash mid-write; cut it so the next append starts clean
                    logger.warning("Skipping torn tail record", file_path=str(path), error_msg=e.message)
                    drop_last_line(path, fsync=self.fsync)
                    return
                raise StorageIOError(
                    message=f"Corrupt record in {path.name} at line {position + 1}",
                    details={"path": str(path), "line": position + 1, "error": e.message}
                )
            into[orb.id] = orb

        if path == self.log_path and ensure_trailing_newline(path, fsync=self.fsync):
            logger.warning("Terminated unfinished log line", file_path=str(path))

    def snapshot(self) -> None:
        if self.data_dir is None:
            return

        with self._lock:
            orbs = sorted(self._orbs.values(), key=lambda orb: orb.id)
            payload = "".join(orb_to_json(orb) + "\n" for orb in orbs).encode("utf-8")
            atomic_write_bytes(self.snapshot_path, payload, fsync=self.fsync)
            if self.log_path.exists():
                truncate_file(self.log_path, fsync=self.fsync)

        logger.info("Orb store compacted", orb_count=len(orbs), snapshot=str(self.snapshot_path))
