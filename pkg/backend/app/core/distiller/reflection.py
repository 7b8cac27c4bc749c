from datetime import datetime
from typing import List, Optional, Sequence

from pydantic import BaseModel, Field, model_validator

from backend.app.config import get_logger
from backend.app.core.distiller.emotion_tagger import BaseEmotionTagger, default_tagger
from backend.app.core.llm_adapters import BaseLLMAdapter
from backend.app.core.orbs import Orb, Trajectory
from backend.app.core.orbs.models import SUCCESS_THRESHOLD
from backend.app.core.prompts import PromptLibrary, default_prompts
from backend.app.utils.exceptions import AdapterResponseError, IncompleteTrajectoryError

logger = get_logger(__name__)

NO_HISTORY = "No historical reflection"
NEW_PLAN_MARKER = "New Plan:"
SUCCESS_PREFIX = "I succeeded in this mission"
FAILURE_PREFIX = "I failed in this mission"

OBS_JOINER = "\n"


class ReflectionPromptInputs(BaseModel):
    platform: str = ""
    shop_id: str = ""
    user_id: str = ""
    scenario_desc: str = ""
    formatted_messages: str = ""
    action_reward: float = Field(ge=0.0, le=1.0)
    search_reward: float = Field(ge=0.0, le=1.0)
    output_reward: float = Field(ge=0.0, le=1.0)
    reward: float = Field(ge=0.0, le=1.0)
    memory_context: str = ""

    @property
    def success(self) -> bool:
        return self.reward > SUCCESS_THRESHOLD


class ReflectionValidationReport(BaseModel):
    prefix_ok: bool
    new_plan_ok: bool
    errors: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def errors_match_flags(self) -> "ReflectionValidationReport":
        if (self.prefix_ok and self.new_plan_ok) != (not self.errors):
            raise ValueError("errors must be empty exactly when both checks pass")
        return self

    @property
    def ok(self) -> bool:
        return self.prefix_ok and self.new_plan_ok


def format_messages(trajectory: Trajectory) -> str:
    lines = []
    for turn in trajectory.turns:
        lines.append(f"User: {turn.user_utterance}\n")
        if turn.agent_action:
            lines.append(f"Assistant: {turn.agent_action}\n")
    return "".join(lines)


def require_complete(trajectory: Trajectory) -> None:
    if not trajectory.is_complete:
        raise IncompleteTrajectoryError(
            message="Trajectory has no reward on its final turn",
            details={"turns": len(trajectory.turns)}
        )


def inputs_from_trajectory(trajectory: Trajectory, memory_context: str = "") -> ReflectionPromptInputs:
    require_complete(trajectory)
    reward = trajectory.final_reward
    return ReflectionPromptInputs(
        platform=trajectory.platform,
        shop_id=trajectory.shop_id,
        user_id=trajectory.user_id,
        scenario_desc=trajectory.scenario,
        formatted_messages=format_messages(trajectory),
        action_reward=reward.action,
        search_reward=reward.search,
        output_reward=reward.output,
        reward=reward.reward,
        memory_context=memory_context or "",
    )


def render_reflection_prompt(
    inputs: ReflectionPromptInputs,
    prompts: PromptLibrary = default_prompts
) -> str:
    return prompts.render(
        "reflection",
        platform=inputs.platform,
        shop_id=inputs.shop_id,
        user_id=inputs.user_id,
        scenario_desc=inputs.scenario_desc,
        formatted_messages=inputs.formatted_messages,
        action_reward=float(inputs.action_reward),
        search_reward=float(inputs.search_reward),
        output_reward=float(inputs.output_reward),
        overall_result="Success" if inputs.success else "Failure",
        memory_context=inputs.memory_context or NO_HISTORY,
        outcome_verb="succeeded" if inputs.success else "failed",
    )


def policy_reflection(
    model: BaseLLMAdapter,
    trajectory: Trajectory,
    memory_context: str = "",
    prompts: PromptLibrary = default_prompts
) -> str:
    prompt = render_reflection_prompt(inputs_from_trajectory(trajectory, memory_context), prompts)
    return model.complete(prompt)


def validate_reflection(text: str, success: bool) -> ReflectionValidationReport:
    body = (text or "").lstrip()
    prefix = SUCCESS_PREFIX if success else FAILURE_PREFIX
    errors = []

    prefix_ok = body.startswith(prefix)
    if not prefix_ok:
        errors.append(f'reflection must begin with "{prefix}"')

    new_plan_ok = NEW_PLAN_MARKER in body[len(prefix) if prefix_ok else 0:]
    if not new_plan_ok:
        errors.append(f'reflection must contain a "{NEW_PLAN_MARKER}" summary after the opening')

    return ReflectionValidationReport(prefix_ok=prefix_ok, new_plan_ok=new_plan_ok, errors=errors)


def build_context(trajectory: Trajectory) -> dict:
    reward = trajectory.final_reward
    return {
        "reward": reward.reward,
        "action": reward.action,
        "search": reward.search,
        "output": reward.output,
        "user_id": trajectory.user_id,
        "shop_id": trajectory.shop_id,
        "platform": trajectory.platform,
        "scenario": trajectory.scenario,
    }


def generate_orb(
    trajectory: Trajectory,
    model: BaseLLMAdapter,
    memory_context: str,
    now: datetime,
    tagger: BaseEmotionTagger = default_tagger,
    prompts: PromptLibrary = default_prompts
) -> Orb:
    require_complete(trajectory)

    obs = OBS_JOINER.join(trajectory.user_utterances)
    emotion = tagger.tag(trajectory.turns[-1].user_utterance)
    outcome = policy_reflection(model, trajectory, memory_context, prompts)

    if not outcome or not outcome.strip():
        raise AdapterResponseError(message="Reflection model returned empty text")

    orb = Orb.create(
        obs=obs,
        emotion=emotion,
        outcome=outcome,
        context=build_context(trajectory),
        timestamp=now,
    )

    logger.debug("Orb distilled", orb_id=orb.id, emotion=emotion, turns=len(trajectory.turns))
    return orb


def reflect_over_recent(
    model: BaseLLMAdapter,
    recent: Sequence[Orb],
    m: int = 5,
    prompts: PromptLibrary = default_prompts
) -> str:
    if m < 1:
        raise ValueError("m must be >= 1")
    if not recent:
        return ""

    newest = sorted(recent, key=lambda orb: (orb.timestamp, orb.id), reverse=True)[:m]
    reflections = "\n".join(
        f"- [{orb.id[:8]}] {' '.join(orb.outcome.split())}" for orb in newest
    )
    prompt = prompts.render("recent_summary", count=len(newest), reflections=reflections)
    return model.complete(prompt).strip()
