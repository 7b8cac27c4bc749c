from datetime import datetime, timedelta, timezone
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from backend.app.config import get_logger
from backend.app.core.orbs import Trajectory
from backend.app.core.retriever import RetrievalRequest, render_system_prompt
from backend.app.evalkit.environment import (
    FAILURE_REWARD,
    SUCCESS_REWARD,
    ScriptedActor,
    TaskSpec,
    build_protocol_engine,
    simulate_episode,
    validate_task_suite,
)
from backend.app.evalkit.metrics import TrialRecord
from backend.app.services import MemoryEngine
from backend.app.utils.exceptions import InputValidationError

logger = get_logger(__name__)

DEFAULT_TRIALS = 10
PROTOCOL_EPOCH = datetime(2025, 1, 1, tzinfo=timezone.utc)


def episode_timestamp(trial_index: int, task_position: int, task_count: int) -> datetime:
    return PROTOCOL_EPOCH + timedelta(seconds=(trial_index - 1) * task_count + task_position)


def run_protocol(
    tasks: Sequence[TaskSpec],
    trials: int = DEFAULT_TRIALS,
    memory_enabled: bool = True,
    seed: int = 0,
    engine: Optional[MemoryEngine] = None,
    actor: Optional[ScriptedActor] = None,
    show_progress: bool = False
) -> List[TrialRecord]:
    """
    Run every task once per trial without resetting memory between trials
    and without skipping tasks already solved.

    Each (trial, task) consumes exactly one uniform draw whether or not
    memory is enabled, so runs on the same seed see the same base draws.
    Episodes of a trial are reflected on and ingested once the trial ends.
    """
    if trials < 1:
        raise InputValidationError(message="trials must be >= 1", details={"trials": trials})
    tasks = validate_task_suite(tasks)

    if memory_enabled and engine is None:
        engine = build_protocol_engine(tasks)
    actor = actor or ScriptedActor()
    draws = np.random.default_rng(seed).random((trials, len(tasks)))

    logger.info(
        "Protocol run started",
        task_count=len(tasks),
        trials=trials,
        memory_enabled=memory_enabled,
        seed=seed,
    )

    records: List[TrialRecord] = []
    for trial_index in tqdm(range(1, trials + 1), desc="trials", disable=not show_progress):
        episodes: List[Tuple[int, Trajectory, str]] = []

        for position, task in enumerate(tasks):
            base = render_system_prompt(task.platform, task.shop_id, task.user_id)
            prompt = base
            if memory_enabled:
                request = RetrievalRequest(query=task.scenario, requesting_user=task.user_id)
                prompt = engine.augment(
                    request,
                    base=base,
                    platform=task.platform,
                    shop_id=task.shop_id,
                    user_id=task.user_id,
                ).text

            success = actor.attempt(task, prompt, base, float(draws[trial_index - 1, position]))
            records.append(
                TrialRecord(
                    task_id=task.task_id,
                    trial_index=trial_index,
                    success=success,
                    reward_detail=SUCCESS_REWARD if success else FAILURE_REWARD,
                )
            )
            if memory_enabled:
                episodes.append((position, simulate_episode(task, success), actor.memory_block(prompt, base)))

        for position, trajectory, memory_context in episodes:
            engine.ingest_episode(
                trajectory,
                memory_context=memory_context,
                now=episode_timestamp(trial_index, position, len(tasks)),
            )

        solved = sum(1 for record in records[-len(tasks):] if record.success)
        logger.debug("Trial finished", trial_index=trial_index, solved=solved, task_count=len(tasks))

    return records
