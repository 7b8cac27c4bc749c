from typing import Any, Dict, Optional

import httpx
import numpy as np

from backend.app.core.embedders.base_embedder import (
    DEFAULT_DIM,
    BaseEmbedder,
    EmbeddingVector,
    l2_normalize,
)
from backend.app.utils.exceptions import DimensionMismatchError, EmbedderTransportError


class RemoteEmbedder(BaseEmbedder):
    """HTTP encoder client: POST {"text": ...} -> {"embedding": [...]}."""

    def __init__(
        self,
        endpoint: str,
        dim: int = DEFAULT_DIM,
        timeout_seconds: float = 30.0,
        token: Optional[str] = None,
        client: Optional[httpx.Client] = None,
        **kwargs
    ):
        super().__init__(dim, **kwargs)
        self.endpoint = endpoint
        self.timeout_seconds = timeout_seconds
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        self._client = client or httpx.Client(timeout=timeout_seconds, headers=headers)

    def embed(self, text: str) -> EmbeddingVector:
        try:
            response = self._client.post(self.endpoint, json={"text": text})
            response.raise_for_status()
            payload = response.json()
        except (httpx.HTTPError, ValueError) as e:
            self.logger.error("Embedding request failed", endpoint=self.endpoint, error_msg=str(e))
            raise EmbedderTransportError(
                message=f"Embedding request failed: {e}",
                details={"endpoint": self.endpoint}
            )

        values = payload.get("embedding") if isinstance(payload, dict) else None
        if not isinstance(values, list):
            raise EmbedderTransportError(
                message="Embedding response has no 'embedding' list",
                details={"endpoint": self.endpoint}
            )
        if len(values) != self.dim:
            raise DimensionMismatchError(
                message="Remote embedder returned a vector of unexpected dimension",
                details={"expected": self.dim, "received": len(values)}
            )

        return EmbeddingVector(l2_normalize(np.asarray(values, dtype=np.float64)))

    def close(self) -> None:
        self._client.close()

    def get_embedder_info(self) -> Dict[str, Any]:
        return {
            "name": "remote",
            "dim": self.dim,
            "endpoint": self.endpoint,
            "timeout_seconds": self.timeout_seconds,
        }
