from typing import Dict, Optional, Type

from backend.app.config import Settings, get_logger
from backend.app.core.embedders.base_embedder import BaseEmbedder
from backend.app.core.embedders.hashing_embedder import HashingEmbedder
from backend.app.core.embedders.remote_embedder import RemoteEmbedder
from backend.app.utils.exceptions import InvalidConfigurationError

logger = get_logger(__name__)


class EmbedderFactory:

    _embedders: Dict[str, Type[BaseEmbedder]] = {
        "hashing": HashingEmbedder,
        "remote": RemoteEmbedder,
    }

    @classmethod
    def create_embedder(cls, name: Optional[str] = None, dim: int = 768, **kwargs) -> BaseEmbedder:
        name = (name or "hashing").lower().strip()

        if name not in cls._embedders:
            available = cls.list_embedders()
            logger.error(f"Embedder not found: {name}. Available={available}")
            raise InvalidConfigurationError(
                message=f"Embedder '{name}' not found",
                details={"requested_embedder": name, "available_embedders": available}
            )

        embedder = cls._embedders[name](dim=dim, **kwargs)
        logger.info(f"Embedder created: {name} (dim={dim})")
        return embedder

    @classmethod
    def from_settings(cls, settings: Settings) -> BaseEmbedder:
        if settings.EMBED_ENDPOINT:
            return cls.create_embedder(
                "remote",
                dim=settings.EMBED_DIM,
                endpoint=settings.EMBED_ENDPOINT,
                timeout_seconds=settings.EMBED_TIMEOUT_SECONDS,
            )
        return cls.create_embedder("hashing", dim=settings.EMBED_DIM)

    @classmethod
    def list_embedders(cls) -> list:
        return sorted(cls._embedders.keys())


def create_embedder(name: Optional[str] = None, dim: int = 768, **kwargs) -> BaseEmbedder:
    return EmbedderFactory.create_embedder(name, dim, **kwargs)
