from collections import Counter
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from backend.app.config import get_logger
from backend.app.core.embedders import HashingEmbedder
from backend.app.core.llm_adapters import (
    REFLECTION_MARKER,
    REWRITE_MARKER,
    SUMMARY_MARKER,
    ScriptedLLMAdapter,
    extract_rewrite_request,
    scripted_reflection,
    scripted_summary,
)
from backend.app.core.orbs import RewardDetail, Trajectory, Turn
from backend.app.services import MemoryEngine
from backend.app.utils.exceptions import TaskSuiteError
from backend.app.utils.json_utils import load_json_file, save_json_file

logger = get_logger(__name__)

BASE_SUCCESS_SCALE = 0.2
DEFAULT_PLATFORM = "synthetic-mall"
DEFAULT_SHOP_ID = "shop-001"

SUCCESS_CLOSING = "Great, that solved it. Thank you!"
FAILURE_CLOSING = "This is frustrating, my problem is still not solved."
SUCCESS_ACTION = "Followed the stored plan and resolved the request."
FAILURE_ACTION = "Answered from general policy without a specific plan."

SUCCESS_REWARD = RewardDetail(reward=1.0, action=1.0, search=1.0, output=1.0)
FAILURE_REWARD = RewardDetail(reward=0.0, action=0.0, search=1.0, output=0.0)


class TaskSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: str = Field(min_length=1)
    scenario: str = Field(min_length=1)
    required_cue: str = Field(min_length=1)
    difficulty: float = Field(ge=0.0, le=1.0)
    user_id: str = Field(min_length=1)
    shop_id: str = DEFAULT_SHOP_ID
    platform: str = DEFAULT_PLATFORM

    @field_validator("required_cue", "scenario")
    @classmethod
    def not_blank(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("must not be blank")
        return v

    @property
    def base_probability(self) -> float:
        return BASE_SUCCESS_SCALE * (1.0 - self.difficulty)


def validate_task_suite(tasks: Sequence[TaskSpec]) -> List[TaskSpec]:
    tasks = list(tasks)
    if not tasks:
        raise TaskSuiteError(message="Task suite is empty")

    counts = Counter(task.task_id for task in tasks)
    duplicates = sorted(task_id for task_id, count in counts.items() if count > 1)
    if duplicates:
        raise TaskSuiteError(
            message="Task ids must be unique",
            details={"duplicates": duplicates}
        )
    return tasks


def load_task_suite(path: Union[str, Path]) -> List[TaskSpec]:
    payload = load_json_file(path)
    if not isinstance(payload, list):
        raise TaskSuiteError(
            message="Task suite must be a JSON list of tasks",
            details={"path": str(path)}
        )

    try:
        tasks = [TaskSpec.model_validate(entry) for entry in payload]
    except ValidationError as e:
        raise TaskSuiteError(
            message=f"Invalid task in suite: {e.error_count()} error(s)",
            details={"path": str(path), "errors": e.errors(include_url=False, include_context=False)}
        )

    logger.info("Task suite loaded", path=str(path), task_count=len(tasks))
    return validate_task_suite(tasks)


def save_task_suite(tasks: Sequence[TaskSpec], path: Union[str, Path]) -> Path:
    return save_json_file([task.model_dump() for task in tasks], path)


TRANSFER_SCENARIOS = (
    "The wireless earbuds from order #48213 arrived with a cracked charging case.",
    "My espresso machine (order #48310) leaks water from the base after every brew.",
    "Order #48407: the hiking backpack was delivered to my old apartment instead of the new address.",
    "I was billed twice for the smart thermostat in order #48504.",
    "The linen bedsheet set from order #48601 came in beige although I picked navy.",
    "Tracking for order #48798 says the robot vacuum was delivered, but nothing reached my porch.",
    "My standing desk from order #48895 is missing the left leg bracket.",
    "The mechanical keyboard in order #48992 has three dead keys out of the box.",
    "I returned the air purifier from order #49089 a month ago and still have no refund.",
    "The warranty claim for my electric toothbrush, order #49186, was rejected without explanation.",
    "Order #49283 for the running shoes shipped the wrong size, a 9 instead of an 11.",
    "The baby stroller from order #49380 has a wobbly front wheel that will not lock.",
    "My cast iron skillet in order #49477 showed up rusted inside the sealed box.",
    "The coupon SPRING20 was not applied to the bluetooth speaker in order #49574.",
    "Order #49671 with the office chair has been stuck in customs for three weeks.",
    "The digital camera from order #49768 is a refurbished unit even though I paid for new.",
    "My winter parka from order #49865 has a broken zipper and a torn lining.",
    "The gaming monitor in order #49962 flickers whenever the refresh rate goes above 60 hertz.",
    "I cancelled order #50059 for the blender within an hour but was still charged.",
    "The wool rug in order #50156 smells strongly of chemicals and I want to exchange it.",
    "Order #50253: the garden hose reel arrived without the mounting screws.",
    "The kids tablet from order #50350 will not charge with the included cable.",
    "My desk lamp in order #50447 was marked as a gift but the invoice was printed inside.",
    "The water filter pitcher subscription under order #50544 renewed after I cancelled it.",
    "The travel suitcase from order #50641 has a cracked shell and a jammed telescopic handle.",
    "My fitness tracker from order #50738 loses its pairing with my phone every night.",
    "The rice cooker in order #50835 came with a European plug that does not fit my outlets.",
    "Order #50932 for the yoga mat was split into two parcels and only one arrived.",
    "The leather wallet I ordered in #51029 has a stitching defect along the card slots.",
    "The ceramic frying pan from order #51126 lost its nonstick coating after one week.",
)

CUE_ACTIONS = (
    "escalate to the logistics desk",
    "issue a prepaid return label",
    "reship with tracked express courier",
    "apply the duplicate-charge reversal",
    "open a warranty override ticket",
    "confirm the address with the carrier",
    "send the missing accessory kit",
    "offer a store credit voucher",
)

CUE_CONDITIONS = (
    "before closing the chat",
    "within the same session",
    "after checking the order log",
    "after verifying the payment record",
    "once the customer confirms",
)

TWIN_PAIRS = 10
SHARED_PAIRS = 10
SINGLES = 10


def transfer_cue(index: int) -> str:
    return f"{CUE_ACTIONS[index % len(CUE_ACTIONS)]} {CUE_CONDITIONS[index // len(CUE_ACTIONS)]}"


def build_transfer_suite() -> List[TaskSpec]:
    """
    The 50-task transfer suite.

    - 10 pairs of users with the same complaint who each need a different
      cue. Only wide retrieval (k > 1) can serve both members of a pair.
    - 10 pairs of users with the same complaint and a shared cue, so a
      lesson written for one user transfers to the other.
    - 10 stand-alone tasks.
    """
    tasks: List[TaskSpec] = []
    user_number = 0

    def add(task_id: str, scenario: str, cue: str, difficulty: float) -> None:
        nonlocal user_number
        user_number += 1
        tasks.append(
            TaskSpec(
                task_id=task_id,
                scenario=scenario,
                required_cue=cue,
                difficulty=difficulty,
                user_id=f"user-{user_number:03d}",
            )
        )

    for pair in range(TWIN_PAIRS):
        scenario = TRANSFER_SCENARIOS[pair]
        add(f"twin-cue-{pair + 1:02d}-a", scenario, transfer_cue(2 * pair), 1.0)
        add(f"twin-cue-{pair + 1:02d}-b", scenario, transfer_cue(2 * pair + 1), 1.0)

    for pair in range(SHARED_PAIRS):
        scenario = TRANSFER_SCENARIOS[TWIN_PAIRS + pair]
        cue = transfer_cue(2 * TWIN_PAIRS + pair)
        add(f"shared-cue-{pair + 1:02d}-a", scenario, cue, 0.9)
        add(f"shared-cue-{pair + 1:02d}-b", scenario, cue, 0.9)

    for index in range(SINGLES):
        scenario = TRANSFER_SCENARIOS[TWIN_PAIRS + SHARED_PAIRS + index]
        cue = transfer_cue(2 * TWIN_PAIRS + SHARED_PAIRS + index)
        add(f"single-{index + 1:02d}", scenario, cue, 0.9)

    return validate_task_suite(tasks)


def simulate_episode(task: TaskSpec, success: bool) -> Trajectory:
    return Trajectory(
        turns=[
            Turn(
                user_utterance=task.scenario,
                agent_action=SUCCESS_ACTION if success else FAILURE_ACTION,
            ),
            Turn(
                user_utterance=SUCCESS_CLOSING if success else FAILURE_CLOSING,
                reward=SUCCESS_REWARD if success else FAILURE_REWARD,
            ),
        ],
        scenario=task.scenario,
        user_id=task.user_id,
        shop_id=task.shop_id,
        platform=task.platform,
    )


class ProtocolReflectionBackend(ScriptedLLMAdapter):
    """
    Scripted model for evaluation runs. Reflections for a known task name its
    required cue in the "New Plan:" section, whether the episode succeeded
    or not; rewrite and summary prompts get the stock scripted answers.
    """

    def __init__(self, tasks: Sequence[TaskSpec], **kwargs):
        self.tasks = tuple(tasks)
        super().__init__(
            rules=[
                (REFLECTION_MARKER, self.reflect),
                (SUMMARY_MARKER, scripted_summary),
                (REWRITE_MARKER, extract_rewrite_request),
            ],
            **kwargs
        )

    def find_task(self, prompt: str) -> Optional[TaskSpec]:
        for task in self.tasks:
            if task.scenario in prompt and f"you serve is {task.user_id}." in prompt:
                return task
        return None

    def reflect(self, prompt: str) -> str:
        task = self.find_task(prompt)
        if task is None:
            return scripted_reflection(prompt)

        if "Overall result: Success" in prompt:
            return (
                "I succeeded in this mission. Verifying the order before acting "
                "kept every tool call on target.\n"
                f"New Plan: {task.required_cue}."
            )
        return (
            "I failed in this mission. I answered from general policy and never "
            "took the one step this complaint needed.\n"
            f"New Plan: {task.required_cue}."
        )

    def get_adapter_info(self) -> Dict[str, Any]:
        return {"name": "protocol-reflection", "deterministic": True, "tasks": len(self.tasks)}


class ScriptedActor:
    """
    Stand-in for the frozen agent. It succeeds when the memory block of its
    prompt carries the task's cue, or when the seeded base draw fires.
    """

    @staticmethod
    def memory_block(prompt: str, base: str) -> str:
        if prompt.endswith(base):
            return prompt[:len(prompt) - len(base)]
        return prompt

    def attempt(self, task: TaskSpec, prompt: str, base: str, draw: float) -> bool:
        if task.required_cue in self.memory_block(prompt, base):
            return True
        return draw < task.base_probability


def build_protocol_engine(
    tasks: Sequence[TaskSpec],
    k_default: int = 5,
    cross_user: bool = True,
    dim: int = 768,
    data_dir: Optional[Union[str, Path]] = None
) -> MemoryEngine:
    return MemoryEngine(
        reflection_model=ProtocolReflectionBackend(tasks),
        embedder=HashingEmbedder(dim=dim),
        data_dir=data_dir,
        k_default=k_default,
        cross_user=cross_user,
        fsync=False,
    )
