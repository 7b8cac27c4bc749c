import re
import threading
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from backend.app.core.llm_adapters.base_adapter import BaseLLMAdapter

Responder = Callable[[str], str]

REWRITE_MARKER = "Rewritten question:"
REFLECTION_MARKER = "Reflection Requirements"
SUMMARY_MARKER = "Summarize the past reflections"

DEFAULT_NEW_PLAN = (
    "Confirm the order and product details with the search tool first, "
    "then call the matching action tool once with verified parameters."
)


class EchoLLMAdapter(BaseLLMAdapter):
    """Identity backend: the completion is the prompt itself."""

    def complete(self, prompt: str) -> str:
        return prompt

    def get_adapter_info(self) -> Dict[str, Any]:
        return {"name": "echo", "deterministic": True}


class ScriptedLLMAdapter(BaseLLMAdapter):
    """
    Deterministic backend dispatching on the first marker found in the
    prompt. Rules are immutable after construction, so one instance can be
    shared by any number of threads.
    """

    def __init__(
        self,
        rules: Sequence[Tuple[str, Responder]] = (),
        default: Optional[Responder] = None,
        **kwargs
    ):
        super().__init__(**kwargs)
        self._rules: Tuple[Tuple[str, Responder], ...] = tuple(rules)
        self._default = default or (lambda prompt: prompt)

    def complete(self, prompt: str) -> str:
        for marker, responder in self._rules:
            if marker in prompt:
                return responder(prompt)
        return self._default(prompt)

    def get_adapter_info(self) -> Dict[str, Any]:
        return {
            "name": "scripted",
            "deterministic": True,
            "markers": [marker for marker, _ in self._rules],
        }


class RecordingLLMAdapter(BaseLLMAdapter):
    """Wraps another adapter and keeps every prompt it was asked to complete."""

    def __init__(self, inner: Optional[BaseLLMAdapter] = None, **kwargs):
        super().__init__(**kwargs)
        self.inner = inner or EchoLLMAdapter()
        self._lock = threading.Lock()
        self._prompts: List[str] = []

    @property
    def prompts(self) -> List[str]:
        with self._lock:
            return list(self._prompts)

    @property
    def last_prompt(self) -> Optional[str]:
        with self._lock:
            return self._prompts[-1] if self._prompts else None

    def complete(self, prompt: str) -> str:
        with self._lock:
            self._prompts.append(prompt)
        return self.inner.complete(prompt)

    def get_adapter_info(self) -> Dict[str, Any]:
        return {"name": "recording", "inner": self.inner.get_adapter_info()}


def extract_rewrite_request(prompt: str) -> str:
    """Pull the raw user message back out of a rendered rewrite prompt."""
    match = re.search(r"User message:\n(.*?)\n(?:Dialogue context:\n.*?\n)?Rewritten question:", prompt, re.S)
    if not match:
        return prompt.strip()
    return match.group(1).strip()


def scripted_reflection(prompt: str, new_plan: str = DEFAULT_NEW_PLAN) -> str:
    succeeded = "Overall result: Success" in prompt
    verdict = "succeeded" if succeeded else "failed"
    analysis = (
        "The decisive step was choosing the right tool with verified parameters."
        if succeeded
        else "The key failure was acting before verifying the order state and tool parameters."
    )
    return f"I {verdict} in this mission. {analysis}\nNew Plan: {new_plan}"


def scripted_summary(prompt: str) -> str:
    plans = []
    for line in prompt.splitlines():
        if not line.startswith("- "):
            continue
        _, marker, plan = line.partition("New Plan:")
        plans.append((plan if marker else line[2:]).strip())
    if not plans:
        return ""
    return f"Across the last {len(plans)} reflections: " + " ".join(plans)


def build_scripted_backend(new_plan: str = DEFAULT_NEW_PLAN) -> ScriptedLLMAdapter:
    return ScriptedLLMAdapter(
        rules=[
            (REFLECTION_MARKER, lambda prompt: scripted_reflection(prompt, new_plan)),
            (SUMMARY_MARKER, scripted_summary),
            (REWRITE_MARKER, extract_rewrite_request),
        ]
    )
