import logging
import sys
from datetime import datetime, timezone
from logging.handlers import TimedRotatingFileHandler
from typing import Any, Dict, List, Optional

from pythonjsonlogger import jsonlogger

from .settings import settings


# attributes every LogRecord already carries; structured fields must not clobber them
RESERVED_LOG_KEYS = frozenset(logging.LogRecord("", 0, "", 0, "", None, None).__dict__) | {"message", "asctime"}

TEXT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s"


def _safe_fields(fields: Dict[str, Any]) -> Dict[str, Any]:
    return {(f"extra_{key}" if key in RESERVED_LOG_KEYS else key): value for key, value in fields.items()}


class SafeLogger(logging.Logger):
    """Logger that takes structured fields as keyword arguments.

        logger.info("Orb stored", orb_id=orb.id, stored="created")
    """

    def _log(self, level, msg, args, exc_info=None, extra=None, stack_info=False, stacklevel=1, **fields):
        merged = {**(extra or {}), **fields}
        super()._log(
            level,
            msg,
            args,
            exc_info=exc_info,
            extra=_safe_fields(merged) if merged else None,
            stack_info=stack_info,
            stacklevel=stacklevel + 1,
        )


class MemOrbJsonFormatter(jsonlogger.JsonFormatter):
    def add_fields(self, log_record, record, message_dict):
        super().add_fields(log_record, record, message_dict)
        log_record.update(
            timestamp=datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            level=record.levelname,
            app=settings.APP_NAME,
            environment=settings.ENVIRONMENT,
            module=record.module,
            function=record.funcName,
            line=record.lineno,
        )


def build_formatter(log_format: Optional[str] = None) -> logging.Formatter:
    if (log_format or settings.LOG_FORMAT) == "json":
        return MemOrbJsonFormatter("%(timestamp)s %(level)s %(name)s %(message)s")
    return logging.Formatter(TEXT_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")


def build_handlers(log_file: str = "memorb.log") -> List[logging.Handler]:
    # stderr keeps CLI stdout parseable
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]

    if settings.LOG_TO_FILE:
        log_dir = settings.get_absolute_path(settings.LOGS_DIR)
        log_dir.mkdir(parents=True, exist_ok=True)
        handlers.append(
            TimedRotatingFileHandler(
                filename=log_dir / log_file,
                when=settings.LOG_ROTATION,
                backupCount=settings.LOG_RETENTION_DAYS,
                encoding="utf-8",
            )
        )

    formatter = build_formatter()
    for handler in handlers:
        handler.setFormatter(formatter)
    return handlers


def setup_logging(logger_name: Optional[str] = None) -> logging.Logger:
    logging.setLoggerClass(SafeLogger)
    logger = logging.getLogger(logger_name)
    logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO))
    logger.handlers = build_handlers()
    logger.propagate = False
    return logger


def get_logger(name: str) -> logging.Logger:
    return setup_logging(name)


def set_log_level(level: str) -> None:
    """Re-level every logger created through get_logger (CLI --log-level)."""
    numeric = getattr(logging, level.upper(), logging.INFO)
    for logger in logging.Logger.manager.loggerDict.values():
        if isinstance(logger, SafeLogger):
            logger.setLevel(numeric)
