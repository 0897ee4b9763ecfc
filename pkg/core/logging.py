"""
Logging configuration using loguru.
Provides structured logging to stderr with optional rotating log files.
"""

import sys
import time
from functools import wraps
from pathlib import Path

from loguru import logger

# Remove default handler
logger.remove()

# MUGER_LOG values -> loguru levels
LEVELS = {
    "error": "ERROR",
    "warn": "WARNING",
    "warning": "WARNING",
    "info": "INFO",
    "debug": "DEBUG",
}

DEFAULT_LOG_DIR = Path(__file__).parent.parent / "logs"


def resolve_level(level: str) -> str:
    """Map a MUGER_LOG value (or a loguru level name) onto a loguru level."""
    return LEVELS.get(level.lower(), level.upper())


def setup_logging(
    level: str = "warn",
    log_to_file: bool = False,
    log_to_console: bool = True,
    json_logs: bool = False,
    log_dir: str | Path | None = None,
):
    """
    Configure logging for the application.

    Args:
        level: error, warn, info or debug (loguru level names are accepted too)
        log_to_file: Whether to write logs to files
        log_to_console: Whether to output logs to stderr
        json_logs: Whether to use JSON format for file logs
        log_dir: Directory for log files (defaults to ./logs)
    """
    level = resolve_level(level)
    logger.remove()

    console_format = (
        "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
        "<level>{level: <8}</level> | "
        "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
        "<level>{message}</level> | {extra}"
    )

    file_format = (
        "{time:YYYY-MM-DD HH:mm:ss.SSS} | "
        "{level: <8} | "
        "{name}:{function}:{line} | "
        "{message} | {extra}"
    )

    if log_to_console:
        logger.add(
            sys.stderr,
            format=console_format,
            level=level,
            colorize=True,
            backtrace=True,
            diagnose=False,
        )

    if log_to_file:
        directory = Path(log_dir) if log_dir else DEFAULT_LOG_DIR
        directory.mkdir(parents=True, exist_ok=True)

        logger.add(
            directory / "app.log",
            format=file_format if not json_logs else None,
            serialize=json_logs,
            level=level,
            rotation="10 MB",
            retention=1,
        )

        logger.add(
            directory / "error.log",
            format=file_format if not json_logs else None,
            serialize=json_logs,
            level="ERROR",
            rotation="10 MB",
            retention=1,
            backtrace=True,
        )

        # Per-command timings
        logger.add(
            directory / "pipeline.log",
            format=file_format,
            level="DEBUG",
            rotation="10 MB",
            retention=1,
            filter=lambda record: record["extra"].get("category") == "pipeline",
        )

    logger.debug("Logging initialized", level=level, log_to_file=log_to_file)
    return logger


class LogContext:
    """Context manager for adding context to log messages."""

    def __init__(self, **kwargs):
        self.context = kwargs
        self._token = None

    def __enter__(self):
        self._token = logger.contextualize(**self.context)
        self._token.__enter__()
        return logger

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self._token:
            self._token.__exit__(exc_type, exc_val, exc_tb)


def log_stage(func):
    """Decorator to log a pipeline stage with timing."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        stage = func.__name__
        start_time = time.perf_counter()
        logger.info(f"Stage started: {stage}", category="pipeline")

        try:
            result = func(*args, **kwargs)
            elapsed = time.perf_counter() - start_time
            logger.info(
                f"Stage completed: {stage}",
                category="pipeline",
                elapsed_ms=round(elapsed * 1000, 2),
            )
            return result
        except Exception as e:
            elapsed = time.perf_counter() - start_time
            logger.error(
                f"Stage failed: {stage}",
                category="pipeline",
                elapsed_ms=round(elapsed * 1000, 2),
                error=str(e),
            )
            raise

    return wrapper
