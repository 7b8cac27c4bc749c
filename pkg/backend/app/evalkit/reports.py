import csv
import io
from pathlib import Path
from typing import Dict, List, Sequence, Union

from backend.app.config import get_logger
from backend.app.evalkit.metrics import (
    PassKReport,
    SuccessRateTables,
    TrialRecord,
    pass_k_curve,
    success_matrix,
    success_rate_tables,
)
from backend.app.utils.file_utils import atomic_write_bytes
from backend.app.utils.json_utils import save_json_file

logger = get_logger(__name__)

RATE_FORMAT = "{:.6f}"

SUCCESS_TABLE_FILE = "success_rates.csv"
TRIAL_MATRIX_FILE = "trial_matrix.csv"
PASS_K_FILE = "pass_k.json"
PASS_K_CURVE_FILE = "pass_k_curve.csv"


def _write_csv(path: Path, rows: Sequence[Sequence[str]]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    atomic_write_bytes(path, buffer.getvalue().encode("utf-8"), fsync=False)
    return path


def trial_header(trials: int) -> List[str]:
    return [f"T{index}" for index in range(1, trials + 1)]


def write_success_tables(tables: SuccessRateTables, path: Union[str, Path]) -> Path:
    rows = [
        ["table"] + trial_header(tables.trials),
        ["per_trial"] + [RATE_FORMAT.format(rate) for rate in tables.per_trial],
        ["cumulative"] + [RATE_FORMAT.format(rate) for rate in tables.cumulative],
    ]
    return _write_csv(Path(path), rows)


def write_trial_matrix(records: Sequence[TrialRecord], path: Union[str, Path]) -> Path:
    matrix = success_matrix(records)
    trials = len(next(iter(matrix.values()), []))
    rows = [["task_id"] + trial_header(trials)]
    for task_id, outcomes in matrix.items():
        rows.append([task_id] + ["1" if success else "0" for success in outcomes])
    return _write_csv(Path(path), rows)


def write_pass_k_reports(reports: Sequence[PassKReport], path: Union[str, Path]) -> Path:
    return save_json_file([report.model_dump() for report in reports], path)


def write_pass_k_curve(reports: Sequence[PassKReport], path: Union[str, Path]) -> Path:
    rows = [["k", "pass_k"]]
    rows.extend([str(report.k), RATE_FORMAT.format(report.expectation)] for report in reports)
    return _write_csv(Path(path), rows)


def write_evaluation_reports(
    records: Sequence[TrialRecord],
    out_dir: Union[str, Path],
    label: str = "memory"
) -> Dict[str, Path]:
    """Write every report for one protocol run; file names carry `label` as a prefix."""
    out_dir = Path(out_dir)
    reports = pass_k_curve(records)

    paths = {
        "success_rates": write_success_tables(success_rate_tables(records), out_dir / f"{label}_{SUCCESS_TABLE_FILE}"),
        "trial_matrix": write_trial_matrix(records, out_dir / f"{label}_{TRIAL_MATRIX_FILE}"),
        "pass_k": write_pass_k_reports(reports, out_dir / f"{label}_{PASS_K_FILE}"),
        "pass_k_curve": write_pass_k_curve(reports, out_dir / f"{label}_{PASS_K_CURVE_FILE}"),
    }
    logger.info("Evaluation reports written", out_dir=str(out_dir), label=label, files=len(paths))
    return paths
