from .identity import context_to_string, compute_id, is_orb_id
from .models import (
    Orb,
    Turn,
    Trajectory,
    RewardDetail,
    EmotionLabel,
    FRUSTRATED,
    SATISFIED,
    NEUTRAL,
    format_timestamp,
    ensure_utc,
    utc_now,
)
from .documents import render_document, orb_to_dict, orb_to_json, orb_from_json

__all__ = [
    'context_to_string',
    'compute_id',
    'is_orb_id',
    'Orb',
    'Turn',
    'Trajectory',
    'RewardDetail',
    'EmotionLabel',
    'FRUSTRATED',
    'SATISFIED',
    'NEUTRAL',
    'format_timestamp',
    'ensure_utc',
    'utc_now',
    'render_document',
    'orb_to_dict',
    'orb_to_json',
    'orb_from_json',
]
