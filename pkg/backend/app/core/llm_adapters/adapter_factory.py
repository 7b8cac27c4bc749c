from typing import Dict, Optional, Type

from backend.app.config import Settings, get_logger
from backend.app.core.llm_adapters.base_adapter import BaseLLMAdapter
from backend.app.core.llm_adapters.remote_adapter import RemoteLLMAdapter
from backend.app.core.llm_adapters.scripted_adapter import (
    EchoLLMAdapter,
    ScriptedLLMAdapter,
    build_scripted_backend,
)
from backend.app.utils.exceptions import InvalidConfigurationError

logger = get_logger(__name__)


class LLMAdapterFactory:

    _adapters: Dict[str, Type[BaseLLMAdapter]] = {
        "echo": EchoLLMAdapter,
        "scripted": ScriptedLLMAdapter,
        "remote": RemoteLLMAdapter,
    }

    @classmethod
    def create_adapter(cls, name: Optional[str] = None, **kwargs) -> BaseLLMAdapter:
        name = (name or "scripted").lower().strip()

        if name not in cls._adapters:
            available = cls.list_adapters()
            logger.error(f"LLM adapter not found: {name}. Available={available}")
            raise InvalidConfigurationError(
                message=f"LLM adapter '{name}' not found",
                details={"requested_adapter": name, "available_adapters": available}
            )

        if name == "scripted" and not kwargs:
            adapter = build_scripted_backend()
        else:
            adapter = cls._adapters[name](**kwargs)

        logger.info(f"LLM adapter created: {name}")
        return adapter

    @classmethod
    def from_settings(cls, settings: Settings) -> BaseLLMAdapter:
        if settings.LLM_ENDPOINT:
            return cls.create_adapter(
                "remote",
                endpoint=settings.LLM_ENDPOINT,
                token=settings.LLM_TOKEN,
                timeout_seconds=settings.LLM_TIMEOUT_SECONDS,
            )
        return cls.create_adapter("scripted")

    @classmethod
    def list_adapters(cls) -> list:
        return sorted(cls._adapters.keys())


def create_llm_adapter(name: Optional[str] = None, **kwargs) -> BaseLLMAdapter:
    return LLMAdapterFactory.create_adapter(name, **kwargs)
