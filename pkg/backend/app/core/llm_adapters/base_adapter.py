from abc import ABC, abstractmethod
from typing import Any, Dict

from backend.app.config import get_logger

logger = get_logger(__name__)


class BaseLLMAdapter(ABC):
    """
    Frozen text-completion backend. Inference only: no update or train entry point.
    """

    thread_safe: bool = True

    def __init__(self, **kwargs):
        self.config = kwargs
        self.logger = get_logger(self.__class__.__name__)

    @abstractmethod
    def complete(self, prompt: str) -> str:
        pass

    @abstractmethod
    def get_adapter_info(self) -> Dict[str, Any]:
        pass
