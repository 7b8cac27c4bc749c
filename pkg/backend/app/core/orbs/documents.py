import json
from typing import Any, Dict

from pydantic import ValidationError

from backend.app.core.orbs.identity import context_to_string
from backend.app.core.orbs.models import Orb, format_timestamp
from backend.app.utils.exceptions import InvalidOrbError
from backend.app.utils.json_utils import compact_json

DOCUMENT_SEPARATOR = "\n"


def render_document(orb: Orb) -> str:
    # field order is fixed: obs, emotion, outcome, context; id and timestamp never enter
    return DOCUMENT_SEPARATOR.join(
        (orb.obs, orb.emotion, orb.outcome, context_to_string(orb.context))
    )


def orb_to_dict(orb: Orb) -> Dict[str, Any]:
    return {
        "id": orb.id,
        "obs": orb.obs,
        "emotion": orb.emotion,
        "outcome": orb.outcome,
        "context": dict(orb.context),
        "timestamp": format_timestamp(orb.timestamp),
    }


def orb_to_json(orb: Orb) -> str:
    return compact_json(orb_to_dict(orb))


def orb_from_json(line: str) -> Orb:
    try:
        return Orb.model_validate(json.loads(line))
    except (json.JSONDecodeError, ValidationError) as e:
        raise InvalidOrbError(
            message=f"Invalid orb record: {e}",
            details={"error": str(e)}
        )
