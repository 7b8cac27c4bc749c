import hashlib
import re
from typing import Any, Mapping

from backend.app.utils.json_utils import canonical_json

# ASCII unit separator between hashed fields
FIELD_SEPARATOR = b"\x1f"

ORB_ID_PATTERN = re.compile(r"^[0-9a-f]{64}$")


def context_to_string(context: Mapping[str, Any]) -> str:
    return canonical_json(context)


def compute_id(obs: str, emotion: str, outcome: str) -> str:
    digest = hashlib.sha256()
    digest.update(obs.encode("utf-8"))
    digest.update(FIELD_SEPARATOR)
    digest.update(emotion.encode("utf-8"))
    digest.update(FIELD_SEPARATOR)
    digest.update(outcome.encode("utf-8"))
    return digest.hexdigest()


def is_orb_id(value: str) -> bool:
    return bool(ORB_ID_PATTERN.match(value or ""))
