from .emotion_tagger import (
    BaseEmotionTagger,
    LexiconEmotionTagger,
    default_tagger,
    tag_emotion,
    DEFAULT_NEGATIVE_TERMS,
    DEFAULT_POSITIVE_TERMS,
)
from .reflection import (
    ReflectionPromptInputs,
    ReflectionValidationReport,
    format_messages,
    inputs_from_trajectory,
    render_reflection_prompt,
    policy_reflection,
    validate_reflection,
    generate_orb,
    reflect_over_recent,
    NO_HISTORY,
    NEW_PLAN_MARKER,
    SUCCESS_PREFIX,
    FAILURE_PREFIX,
)

__all__ = [
    'BaseEmotionTagger',
    'LexiconEmotionTagger',
    'default_tagger',
    'tag_emotion',
    'DEFAULT_NEGATIVE_TERMS',
    'DEFAULT_POSITIVE_TERMS',
    'ReflectionPromptInputs',
    'ReflectionValidationReport',
    'format_messages',
    'inputs_from_trajectory',
    'render_reflection_prompt',
    'policy_reflection',
    'validate_reflection',
    'generate_orb',
    'reflect_over_recent',
    'NO_HISTORY',
    'NEW_PLAN_MARKER',
    'SUCCESS_PREFIX',
    'FAILURE_PREFIX',
]
