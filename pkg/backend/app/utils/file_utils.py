import os
from pathlib import Path
from typing import Iterator, Union

from backend.app.config import get_logger
from backend.app.utils.exceptions import StorageIOError

logger = get_logger(__name__)


def ensure_directory(directory: Union[str, Path]) -> Path:
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise StorageIOError(
            message=f"Failed to create directory: {directory}",
            details={"path": str(directory), "error": str(e)}
        )
    return directory


def append_line(path: Path, line: str, fsync: bool = True) -> None:
    try:
        with open(path, "a", encoding="utf-8", newline="\n") as f:
            f.write(line)
            f.write("\n")
            f.flush()
            if fsync:
                os.fsync(f.fileno())
    except OSError as e:
        logger.error("Append failed", file_path=str(path), error_msg=str(e))
        raise StorageIOError(
            message=f"Failed to append to {path.name}: {e}",
            details={"path": str(path), "error": str(e)}
        )


def atomic_write_bytes(path: Path, payload: bytes, fsync: bool = True) -> Path:
    """Write to a sibling temp file, then rename over the target."""
    tmp_path = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp_path, "wb") as f:
            f.write(payload)
            f.flush()
            if fsync:
                os.fsync(f.fileno())
        os.replace(tmp_path, path)
    except OSError as e:
        logger.error("Atomic write failed", file_path=str(path), error_msg=str(e))
        raise StorageIOError(
            message=f"Failed to write {path.name}: {e}",
            details={"path": str(path), "error": str(e)}
        )
    return path


def read_lines(path: Path) -> Iterator[str]:
    # a torn multi-byte character must not abort the read; the record fails to parse instead
    try:
        with open(path, "r", encoding="utf-8", errors="surrogateescape", newline="\n") as f:
            for line in f:
                yield line.rstrip("\n")
    except OSError as e:
        raise StorageIOError(
            message=f"Failed to read {path.name}: {e}",
            details={"path": str(path), "error": str(e)}
        )


def truncate_file(path: Path, fsync: bool = True) -> None:
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.flush()
            if fsync:
                os.fsync(f.fileno())
    except OSError as e:
        raise StorageIOError(
            message=f"Failed to truncate {path.name}: {e}",
            details={"path": str(path), "error": str(e)}
        )


def drop_last_line(path: Path, fsync: bool = True) -> int:
    """Cut the file back to the end of its last complete line before the final record.

    Returns the new size in bytes.
    """
    try:
        data = path.read_bytes()
        cut = data.rstrip(b" \t\r\n").rfind(b"\n") + 1
        with open(path, "r+b") as f:
            f.truncate(cut)
            f.flush()
            if fsync:
                os.fsync(f.fileno())
    except OSError as e:
        raise StorageIOError(
            message=f"Failed to repair {path.name}: {e}",
            details={"path": str(path), "error": str(e)}
        )
    return cut


def ensure_trailing_newline(path: Path, fsync: bool = True) -> bool:
    """Terminate a final record that was written without its newline. Returns True if one was added."""
    try:
        with open(path, "r+b") as f:
            f.seek(0, os.SEEK_END)
            if f.tell() == 0:
                return False
            f.seek(-1, os.SEEK_END)
            if f.read(1) == b"\n":
                return False
            f.write(b"\n")
            f.flush()
            if fsync:
                os.fsync(f.fileno())
    except OSError as e:
        raise StorageIOError(
            message=f"Failed to repair {path.name}: {e}",
            details={"path": str(path), "error": str(e)}
        )
    return True
