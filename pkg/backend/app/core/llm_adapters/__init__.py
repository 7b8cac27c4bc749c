from .base_adapter import BaseLLMAdapter
from .scripted_adapter import (
    EchoLLMAdapter,
    ScriptedLLMAdapter,
    RecordingLLMAdapter,
    build_scripted_backend,
    extract_rewrite_request,
    scripted_reflection,
    scripted_summary,
    REWRITE_MARKER,
    REFLECTION_MARKER,
    SUMMARY_MARKER,
    DEFAULT_NEW_PLAN,
)
from .remote_adapter import RemoteLLMAdapter
from .adapter_factory import LLMAdapterFactory, create_llm_adapter

__all__ = [
    'BaseLLMAdapter',
    'EchoLLMAdapter',
    'ScriptedLLMAdapter',
    'RecordingLLMAdapter',
    'build_scripted_backend',
    'extract_rewrite_request',
    'scripted_reflection',
    'scripted_summary',
    'REWRITE_MARKER',
    'REFLECTION_MARKER',
    'SUMMARY_MARKER',
    'DEFAULT_NEW_PLAN',
    'RemoteLLMAdapter',
    'LLMAdapterFactory',
    'create_llm_adapter',
]
