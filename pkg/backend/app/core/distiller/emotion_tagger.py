from abc import ABC, abstractmethod
from typing import Iterable, Tuple

from backend.app.core.orbs import FRUSTRATED, NEUTRAL, SATISFIED

DEFAULT_NEGATIVE_TERMS: Tuple[str, ...] = (
    "frustrat",
    "angry",
    "annoy",
    "terrible",
    "upset",
    "disappoint",
    "unacceptable",
)

DEFAULT_POSITIVE_TERMS: Tuple[str, ...] = (
    "thank",
    "great",
    "satisf",
    "perfect",
    "appreciate",
)


class BaseEmotionTagger(ABC):
    @abstractmethod
    def tag(self, utterance: str) -> str:
        pass


class LexiconEmotionTagger(BaseEmotionTagger):
    """Case-insensitive stem lookup; a negative hit outranks a positive one."""

    def __init__(
        self,
        negative_terms: Iterable[str] = DEFAULT_NEGATIVE_TERMS,
        positive_terms: Iterable[str] = DEFAULT_POSITIVE_TERMS,
    ):
        self.negative_terms = tuple(term.lower() for term in negative_terms if term)
        self.positive_terms = tuple(term.lower() for term in positive_terms if term)

    def tag(self, utterance: str) -> str:
        text = (utterance or "").lower()
        if any(term in text for term in self.negative_terms):
            return FRUSTRATED
        if any(term in text for term in self.positive_terms):
            return SATISFIED
        return NEUTRAL


default_tagger = LexiconEmotionTagger()


def tag_emotion(utterance: str, tagger: BaseEmotionTagger = default_tagger) -> str:
    return tagger.tag(utterance)
