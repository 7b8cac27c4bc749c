from .metrics import (
    TrialRecord,
    PassKReport,
    SuccessRateTables,
    pass_k,
    aggregate_pass_k,
    pass_k_curve,
    success_matrix,
    success_rate_tables,
)
from .environment import (
    TaskSpec,
    ProtocolReflectionBackend,
    ScriptedActor,
    build_protocol_engine,
    build_transfer_suite,
    load_task_suite,
    save_task_suite,
    simulate_episode,
)
from .protocol import run_protocol, DEFAULT_TRIALS
from .reports import write_evaluation_reports

__all__ = [
    'TrialRecord',
    'PassKReport',
    'SuccessRateTables',
    'pass_k',
    'aggregate_pass_k',
    'pass_k_curve',
    'success_matrix',
    'success_rate_tables',
    'TaskSpec',
    'ProtocolReflectionBackend',
    'ScriptedActor',
    'build_protocol_engine',
    'build_transfer_suite',
    'load_task_suite',
    'save_task_suite',
    'simulate_episode',
    'run_protocol',
    'DEFAULT_TRIALS',
    'write_evaluation_reports',
]
