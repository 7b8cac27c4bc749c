from typing import Any, Dict, Optional

import httpx

from backend.app.core.llm_adapters.base_adapter import BaseLLMAdapter
from backend.app.utils.exceptions import AdapterResponseError, AdapterTransportError


class RemoteLLMAdapter(BaseLLMAdapter):
    """HTTP completion client: POST {"prompt": ...} -> {"completion": ...}."""

    def __init__(
        self,
        endpoint: str,
        token: Optional[str] = None,
        timeout_seconds: float = 60.0,
        client: Optional[httpx.Client] = None,
        **kwargs
    ):
        super().__init__(**kwargs)
        self.endpoint = endpoint
        self.timeout_seconds = timeout_seconds
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        self._client = client or httpx.Client(timeout=timeout_seconds, headers=headers)

        self.logger.info(f"Remote LLM adapter initialized | endpoint={endpoint}")

    def complete(self, prompt: str) -> str:
        try:
            response = self._client.post(self.endpoint, json={"prompt": prompt})
            response.raise_for_status()
            payload = response.json()
        except (httpx.HTTPError, ValueError) as e:
            self.logger.error(
                "LLM request failed",
                endpoint=self.endpoint,
                prompt_chars=len(prompt),
                error_msg=str(e)
            )
            raise AdapterTransportError(
                message=f"LLM request failed: {e}",
                details={"endpoint": self.endpoint}
            )

        completion = payload.get("completion") if isinstance(payload, dict) else None
        if not isinstance(completion, str) or not completion.strip():
            raise AdapterResponseError(
                message="LLM response carries no completion text",
                details={"endpoint": self.endpoint}
            )
        return completion

    def close(self) -> None:
        self._client.close()

    def get_adapter_info(self) -> Dict[str, Any]:
        return {
            "name": "remote",
            "endpoint": self.endpoint,
            "timeout_seconds": self.timeout_seconds,
        }
