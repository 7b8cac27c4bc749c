import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union

from backend.app.config import get_logger
from backend.app.utils.exceptions import InputValidationError

logger = get_logger(__name__)


def canonical_json(data: Mapping[str, Any]) -> str:
    """
    Canonical text for a flat mapping: keys sorted by code point (the same
    order as UTF-8 bytes), no whitespace, non-ASCII kept verbatim.
    Equal mappings always give byte-identical output.
    """
    return json.dumps(
        dict(data),
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    )


def compact_json(data: Any) -> str:
    return json.dumps(data, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def load_json_file(path: Union[str, Path]) -> Union[Dict[str, Any], List[Any]]:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InputValidationError(
            message=f"File not found: {path}",
            details={"path": str(path)}
        )
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        logger.error("Failed to parse JSON file", path=str(path), error_msg=str(e))
        raise InputValidationError(
            message=f"Invalid JSON in {path}: {e}",
            details={"path": str(path), "error": str(e)}
        )


def save_json_file(data: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, ensure_ascii=False, sort_keys=False)
        f.write("\n")

    logger.debug("JSON saved", file_path=str(path))
    return path
