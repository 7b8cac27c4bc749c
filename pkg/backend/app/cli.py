"""memorb: operator tool for the memory service.

    memorb ingest episode.json
    memorb query --q "where is my parcel" --k 5
    memorb eval --trials 10 --seed 42 --out reports/
    memorb serve | snapshot | stats
"""
import argparse
import json
import socket
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, Field, ValidationError

from backend.app import __version__
from backend.app.config import Settings, describe, get_logger, load_settings, set_log_level
from backend.app.core.retriever import RetrievalRequest
from backend.app.evalkit import (
    DEFAULT_TRIALS,
    build_protocol_engine,
    build_transfer_suite,
    load_task_suite,
    pass_k_curve,
    run_protocol,
    success_rate_tables,
    write_evaluation_reports,
)
from backend.app.models import EpisodeIngestRequest, EpisodeIngestResponse, RetrieveResponse
from backend.app.services import MemoryEngine, create_memory_engine
from backend.app.utils.exceptions import (
    AdapterException,
    ConfigurationException,
    EvaluationException,
    MemOrbException,
    StorageException,
    ValidationException,
)
from backend.app.utils.json_utils import load_json_file

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ADAPTER = 3
EXIT_STORAGE = 4
EXIT_BIND = 5

EXCERPT_CHARS = 80


class CliConfig(BaseModel):
    """Flag values; anything left as None falls through to env, config file, then defaults."""

    data_dir: Optional[Path] = None
    dim: Optional[int] = Field(default=None, ge=1)
    k: Optional[int] = Field(default=None, ge=1)
    cross_user: Optional[bool] = None
    llm_endpoint: Optional[str] = None
    embed_endpoint: Optional[str] = None

    def to_overrides(self) -> Dict[str, Any]:
        return {
            "DATA_DIR": str(self.data_dir) if self.data_dir is not None else None,
            "EMBED_DIM": self.dim,
            "TOPK_DEFAULT": self.k,
            "CROSS_USER": self.cross_user,
            "LLM_ENDPOINT": self.llm_endpoint,
            "EMBED_ENDPOINT": self.embed_endpoint,
        }


class BindError(Exception):
    pass


def _global_options() -> argparse.ArgumentParser:
    # SUPPRESS keeps unset flags off the namespace so they can be given before or after the command
    parent = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parent.add_argument("--config", type=Path, help="KEY=value settings file")
    parent.add_argument("--data-dir", type=Path, help="directory holding the orb log and vector file")
    parent.add_argument("--dim", type=int, help="embedding dimension")
    parent.add_argument("--k", type=int, help="number of orbs to retrieve")
    parent.add_argument(
        "--cross-user",
        action=argparse.BooleanOptionalAction,
        help="share memory across users (--no-cross-user runs the k=1 ablation)",
    )
    parent.add_argument("--llm-endpoint", help="remote completion endpoint")
    parent.add_argument("--embed-endpoint", help="remote embedding endpoint")
    parent.add_argument("--json", action="store_true", help="machine-readable output")
    parent.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    return parent


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(
        prog="memorb",
        description="Self-reflective memory for customer-service agents",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    ingest = commands.add_parser("ingest", parents=[common], help="distill and store one finished episode")
    ingest.add_argument("trajectory", type=Path, help="trajectory JSON, or an object with a 'trajectory' key")
    ingest.add_argument("--memory-context", default=None, help="past reflections to show the reflection model")
    ingest.add_argument("--now", default=None, help="ISO-8601 ingest timestamp")

    query = commands.add_parser("query", parents=[common], help="retrieve the top-k orbs for a message")
    query.add_argument("--q", required=True, help="current user message")
    query.add_argument("--context", default="", help="running dialogue context")
    query.add_argument("--user", default=None, help="requesting user id")

    evaluate = commands.add_parser("eval", parents=[common], help="run the multi-trial protocol")
    evaluate.add_argument("--tasks", type=Path, default=None, help="task suite JSON (default: built-in transfer suite)")
    evaluate.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    evaluate.add_argument("--no-memory", action="store_true", help="disable retrieval and ingestion")
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.add_argument("--out", type=Path, default=Path("reports"), help="report directory")

    commands.add_parser("serve", parents=[common], help="start the HTTP service")
    commands.add_parser("snapshot", parents=[common], help="compact the orb log and write the vector file")
    commands.add_parser("stats", parents=[common], help="print store statistics")

    return parser


def settings_from_args(args: argparse.Namespace) -> Settings:
    config = CliConfig(
        data_dir=getattr(args, "data_dir", None),
        dim=getattr(args, "dim", None),
        k=getattr(args, "k", None),
        cross_user=getattr(args, "cross_user", None),
        llm_endpoint=getattr(args, "llm_endpoint", None),
        embed_endpoint=getattr(args, "embed_endpoint", None),
    )
    return load_settings(getattr(args, "config", None), **config.to_overrides())


def open_engine(settings: Settings) -> MemoryEngine:
    engine = create_memory_engine(settings)
    engine.load()
    return engine


def emit(args: argparse.Namespace, payload: Any, lines: Sequence[str]) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True))
    else:
        for line in lines:
            print(line)


def read_ingest_request(args: argparse.Namespace) -> EpisodeIngestRequest:
    payload = load_json_file(args.trajectory)
    if not isinstance(payload, dict):
        raise ValidationException(message="Trajectory file must hold a JSON object")
    if "trajectory" not in payload:
        payload = {"trajectory": payload}
    if args.memory_context is not None:
        payload["memory_context"] = args.memory_context
    if args.now is not None:
        payload["now"] = datetime.fromisoformat(args.now.replace("Z", "+00:00"))
    return EpisodeIngestRequest.model_validate(payload)


def cmd_ingest(args: argparse.Namespace, settings: Settings) -> int:
    request = read_ingest_request(args)
    engine = open_engine(settings)
    try:
        result = engine.ingest_episode(request.trajectory, request.memory_context, request.now)
    finally:
        engine.close()

    response = EpisodeIngestResponse.from_result(result)
    lines = [response.orb_id, f"created={str(response.created).lower()}"]
    lines.append(f"prefix_ok={str(response.validation.prefix_ok).lower()}")
    lines.append(f"new_plan_ok={str(response.validation.new_plan_ok).lower()}")
    lines.extend(f"error: {error}" for error in response.validation.errors)
    emit(args, response.model_dump(mode="json"), lines)
    return EXIT_OK


def format_hit_line(rank: int, score: float, orb_id: str, outcome: str) -> str:
    excerpt = " ".join(outcome.split())
    if len(excerpt) > EXCERPT_CHARS:
        excerpt = excerpt[:EXCERPT_CHARS - 3] + "..."
    return f"{rank}\t{score:.6f}\t{orb_id[:8]}\t{excerpt}"


def cmd_query(args: argparse.Namespace, settings: Settings) -> int:
    request = RetrievalRequest(query=args.q, context=args.context, requesting_user=args.user)
    engine = open_engine(settings)
    try:
        memory = engine.retrieve(request)
    finally:
        engine.close()

    response = RetrieveResponse.from_memory(memory)
    lines = [f"{len(response.hits)} hits"]
    lines.extend(
        format_hit_line(rank, hit.score, hit.orb_id, hit.outcome)
        for rank, hit in enumerate(response.hits, start=1)
    )
    emit(args, response.model_dump(mode="json"), lines)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    tasks = load_task_suite(args.tasks) if args.tasks else build_transfer_suite()
    memory_enabled = not args.no_memory
    engine = None
    if memory_enabled:
        engine = build_protocol_engine(
            tasks,
            k_default=settings.TOPK_DEFAULT,
            cross_user=settings.CROSS_USER,
            dim=settings.EMBED_DIM,
        )

    records = run_protocol(
        tasks,
        trials=args.trials,
        memory_enabled=memory_enabled,
        seed=args.seed,
        engine=engine,
        show_progress=not getattr(args, "json", False),
    )

    label = "memory" if memory_enabled else "no_memory"
    paths = write_evaluation_reports(records, args.out, label=label)
    tables = success_rate_tables(records)
    curve = pass_k_curve(records)

    payload = {
        "label": label,
        "tasks": len(tasks),
        "trials": args.trials,
        "seed": args.seed,
        "cumulative": tables.cumulative,
        "per_trial": tables.per_trial,
        "pass_k": {str(report.k): report.expectation for report in curve},
        "reports": {name: str(path) for name, path in paths.items()},
    }
    lines = [f"{label}: {len(tasks)} tasks x {args.trials} trials (seed {args.seed})"]
    lines.append("cumulative " + " ".join(f"{rate:.4f}" for rate in tables.cumulative))
    lines.extend(f"pass^{report.k} = {report.expectation:.6f}" for report in curve)
    emit(args, payload, lines)
    return EXIT_OK


def check_bind(host: str, port: int) -> None:
    try:
        with socket.socket(socket.AF_INET6 if ":" in host else socket.AF_INET, socket.SOCK_STREAM) as probe:
            probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            probe.bind((host, port))
    except OSError as e:
        raise BindError(f"cannot listen on {host}:{port}: {e}")


def cmd_serve(args: argparse.Namespace, settings: Settings) -> int:
    import uvicorn

    from backend.app.main import create_app

    check_bind(settings.listen_host, settings.listen_port)
    for label, value in describe(settings):
        logger.info(f"{label}: {value}")
    engine = open_engine(settings)
    try:
        uvicorn.run(
            create_app(engine=engine, settings=settings),
            host=settings.listen_host,
            port=settings.listen_port,
            log_level=settings.LOG_LEVEL.lower(),
        )
    except SystemExit as e:
        if e.code:
            raise BindError(f"server exited with status {e.code}")
    finally:
        engine.close()
    return EXIT_OK


def cmd_snapshot(args: argparse.Namespace, settings: Settings) -> int:
    engine = open_engine(settings)
    try:
        engine.snapshot()
        stats = engine.stats()
    finally:
        engine.close()

    emit(
        args,
        stats.model_dump(),
        [f"snapshot written to {settings.data_path}", f"orbs={stats.orb_count} vectors={stats.vector_count}"],
    )
    return EXIT_OK


def cmd_stats(args: argparse.Namespace, settings: Settings) -> int:
    engine = open_engine(settings)
    try:
        stats = engine.stats().model_dump()
    finally:
        engine.close()

    emit(args, stats, [f"{key}: {value}" for key, value in stats.items()])
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "query": cmd_query,
    "eval": cmd_eval,
    "serve": cmd_serve,
    "snapshot": cmd_snapshot,
    "stats": cmd_stats,
}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, BindError):
        return EXIT_BIND
    if isinstance(exc, AdapterException):
        return EXIT_ADAPTER
    if isinstance(exc, StorageException):
        return EXIT_STORAGE
    if isinstance(exc, (ValidationException, EvaluationException, ConfigurationException, ValidationError, ValueError)):
        return EXIT_PARSE
    return 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if getattr(args, "log_level", None):
        set_log_level(args.log_level)

    try:
        settings = settings_from_args(args)
        return COMMANDS[args.command](args, settings)
    except (MemOrbException, ValidationError, ValueError, BindError) as e:
        code = exit_code_for(e)
        message = e.message if isinstance(e, MemOrbException) else str(e)
        logger.error("Command failed", command=args.command, exit_code=code, error_msg=message)
        print(f"error: {message}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
