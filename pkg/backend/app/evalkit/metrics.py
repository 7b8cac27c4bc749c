import math
from collections import OrderedDict
from typing import Dict, List, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from backend.app.core.orbs import RewardDetail
from backend.app.utils.exceptions import PassKDomainError, RaggedTrialCountsError


class TrialRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: str = Field(min_length=1)
    trial_index: int = Field(ge=1)
    success: bool
    reward_detail: RewardDetail


class PassKReport(BaseModel):
    k: int = Field(ge=1)
    per_task: Dict[str, float] = Field(default_factory=dict)
    expectation: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def expectation_is_mean(self) -> "PassKReport":
        if self.per_task:
            mean = math.fsum(self.per_task.values()) / len(self.per_task)
            if not math.isclose(mean, self.expectation, rel_tol=1e-12, abs_tol=1e-15):
                raise ValueError("expectation must equal the mean of per_task values")
        return self


class SuccessRateTables(BaseModel):
    """Per-trial and cumulative (solved at least once by trial T) success rates."""

    task_ids: List[str] = Field(default_factory=list)
    per_trial: List[float] = Field(default_factory=list)
    cumulative: List[float] = Field(default_factory=list)

    @property
    def trials(self) -> int:
        return len(self.per_trial)


def _check_int(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise PassKDomainError(
            message=f"{name} must be an integer",
            details={name: repr(value)}
        )
    return value


def pass_k(c: int, n: int, k: int) -> float:
    """
    Probability that k trials drawn without replacement from n (c of which
    succeeded) all succeed: C(c, k) / C(n, k).

    Evaluated as the running product of (c - i) / (n - i), which stays exact
    to well under 1e-12 relative error where factorial ratios would not.
    """
    c, n, k = _check_int("c", c), _check_int("n", n), _check_int("k", k)
    if n < 1 or not 0 <= c <= n or not 1 <= k <= n:
        raise PassKDomainError(
            message="pass^k requires 0 <= c <= n and 1 <= k <= n",
            details={"c": c, "n": n, "k": k}
        )
    if k > c:
        return 0.0

    result = 1.0
    for i in range(k):
        result *= (c - i) / (n - i)
    return result


def group_by_task(records: Sequence[TrialRecord]) -> "OrderedDict[str, Dict[int, TrialRecord]]":
    """Records per task in first-seen task order; a (task, trial) pair may appear once."""
    grouped: "OrderedDict[str, Dict[int, TrialRecord]]" = OrderedDict()
    for record in records:
        trials = grouped.setdefault(record.task_id, {})
        if record.trial_index in trials:
            raise RaggedTrialCountsError(
                message="Duplicate trial record",
                details={"task_id": record.task_id, "trial_index": record.trial_index}
            )
        trials[record.trial_index] = record
    return grouped


def trial_count(grouped: Dict[str, Dict[int, TrialRecord]]) -> int:
    counts = {task_id: len(trials) for task_id, trials in grouped.items()}
    if len(set(counts.values())) > 1:
        raise RaggedTrialCountsError(
            message="Every task must have the same number of trials",
            details={"trial_counts": counts}
        )
    return next(iter(counts.values()), 0)


def aggregate_pass_k(records: Sequence[TrialRecord], k: int) -> PassKReport:
    grouped = group_by_task(records)
    if not grouped:
        raise PassKDomainError(message="pass^k needs at least one trial record")
    n = trial_count(grouped)

    per_task = {
        task_id: pass_k(sum(1 for record in trials.values() if record.success), n, k)
        for task_id, trials in grouped.items()
    }
    expectation = math.fsum(per_task.values()) / len(per_task)
    return PassKReport(k=k, per_task=per_task, expectation=expectation)


def pass_k_curve(records: Sequence[TrialRecord]) -> List[PassKReport]:
    """pass^k for every k from 1 to the number of trials."""
    n = trial_count(group_by_task(records))
    return [aggregate_pass_k(records, k) for k in range(1, n + 1)]


def success_matrix(records: Sequence[TrialRecord]) -> "OrderedDict[str, List[bool]]":
    grouped = group_by_task(records)
    n = trial_count(grouped)
    matrix: "OrderedDict[str, List[bool]]" = OrderedDict()
    for task_id, trials in grouped.items():
        if sorted(trials) != list(range(1, n + 1)):
            raise RaggedTrialCountsError(
                message="Trial indices must run from 1 to n for every task",
                details={"task_id": task_id, "trial_indices": sorted(trials)}
            )
        matrix[task_id] = [trials[index].success for index in range(1, n + 1)]
    return matrix


def success_rate_tables(records: Sequence[TrialRecord]) -> SuccessRateTables:
    matrix = success_matrix(records)
    if not matrix:
        return SuccessRateTables()

    n = len(next(iter(matrix.values())))
    task_count = len(matrix)
    per_trial = []
    cumulative = []
    solved = {task_id: False for task_id in matrix}
    for t in range(n):
        per_trial.append(sum(1 for row in matrix.values() if row[t]) / task_count)
        for task_id, row in matrix.items():
            solved[task_id] = solved[task_id] or row[t]
        cumulative.append(sum(solved.values()) / task_count)

    return SuccessRateTables(task_ids=list(matrix), per_trial=per_trial, cumulative=cumulative)
