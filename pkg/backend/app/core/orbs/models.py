from datetime import datetime, timezone
from typing import Annotated, Any, Dict, List, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    StringConstraints,
    ValidationError,
    field_serializer,
    field_validator,
    model_validator,
)

from backend.app.core.orbs.identity import compute_id
from backend.app.utils.exceptions import InvalidOrbError

FRUSTRATED = "frustrated"
SATISFIED = "satisfied"
NEUTRAL = "neutral"

SUCCESS_THRESHOLD = 0.5

EmotionLabel = Annotated[str, StringConstraints(pattern=r"^[a-z][a-z_]*$")]

ContextValue = Union[bool, int, float, str, None]


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    """RFC 3339, UTC, always with microseconds."""
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def ensure_utc(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


class RewardDetail(BaseModel):
    model_config = ConfigDict(frozen=True)

    reward: float = Field(ge=0.0, le=1.0)
    action: float = Field(ge=0.0, le=1.0)
    search: float = Field(ge=0.0, le=1.0)
    output: float = Field(ge=0.0, le=1.0)

    @property
    def success(self) -> bool:
        return self.reward > SUCCESS_THRESHOLD


class Turn(BaseModel):
    model_config = ConfigDict(frozen=True)

    user_utterance: str = Field(min_length=1)
    agent_action: str = ""
    reward: Optional[RewardDetail] = None


class Trajectory(BaseModel):
    model_config = ConfigDict(frozen=True)

    turns: List[Turn] = Field(min_length=1)
    scenario: str = ""
    user_id: str = ""
    shop_id: str = ""
    platform: str = ""

    @property
    def is_complete(self) -> bool:
        return self.turns[-1].reward is not None

    @property
    def final_reward(self) -> Optional[RewardDetail]:
        return self.turns[-1].reward

    @property
    def user_utterances(self) -> List[str]:
        return [turn.user_utterance for turn in self.turns]


class Orb(BaseModel):
    """Content-addressed memory unit distilled from one episode."""

    model_config = ConfigDict(frozen=True)

    id: str
    obs: str = Field(min_length=1)
    emotion: EmotionLabel
    outcome: str = Field(min_length=1)
    context: Dict[str, ContextValue] = Field(default_factory=dict)
    timestamp: datetime

    @field_validator("timestamp")
    @classmethod
    def normalize_timestamp(cls, v: datetime) -> datetime:
        return ensure_utc(v)

    @model_validator(mode="after")
    def check_content_address(self) -> "Orb":
        expected = compute_id(self.obs, self.emotion, self.outcome)
        if self.id != expected:
            raise ValueError(f"id does not match content digest (expected {expected})")
        return self

    @field_serializer("timestamp")
    def serialize_timestamp(self, ts: datetime) -> str:
        return format_timestamp(ts)

    @classmethod
    def create(
        cls,
        obs: str,
        emotion: str,
        outcome: str,
        context: Optional[Dict[str, Any]] = None,
        timestamp: Optional[datetime] = None,
    ) -> "Orb":
        try:
            return cls(
                id=compute_id(obs, emotion, outcome),
                obs=obs,
                emotion=emotion,
                outcome=outcome,
                context=dict(context or {}),
                timestamp=timestamp or utc_now(),
            )
        except ValidationError as e:
            raise InvalidOrbError(
                message="Orb fields violate invariants",
                details={"errors": e.errors(include_url=False, include_context=False)}
            )

    @property
    def success(self) -> Optional[bool]:
        reward = self.context.get("reward")
        if isinstance(reward, (int, float)) and not isinstance(reward, bool):
            return reward > SUCCESS_THRESHOLD
        return None
