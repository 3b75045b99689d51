"""
Logging Setup

Console and rotating-file handlers for the library and CLI loggers. Every
record carries the verification job it was emitted from, so the interleaved
log of a threaded verify run can be split by job afterwards.
"""

import contextvars
import logging
import sys
from contextlib import contextmanager
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Iterator, Optional

from config import Config

APP_LOGGER = 'ruij_lab'
NO_JOB = '-'

_current_job: contextvars.ContextVar = contextvars.ContextVar('ruij_lab_job', default=NO_JOB)


class JobFilter(logging.Filter):
    """Attach the current verification job name as record.job"""

    def filter(self, record: logging.LogRecord) -> bool:
        record.job = _current_job.get()
        return True


@contextmanager
def job_context(name: str) -> Iterator[None]:
    """Tag records emitted inside the block (by this thread) with a job name"""
    token = _current_job.set(name)
    try:
        yield
    finally:
        _current_job.reset(token)


def current_job() -> str:
    return _current_job.get()


def setup_logger(
    name: str,
    log_file: Optional[Path] = None,
    level: Optional[str] = None
) -> logging.Logger:
    """
    Configure a console handler and a rotating job-tagged file handler

    The CLI logger (APP_LOGGER) prints INFO to stderr; library modules only
    print warnings. The log file receives everything at DEBUG.

    Args:
        name: Module name, or APP_LOGGER for the CLI
        log_file: Path to log file (Config.LOG_FILE if None and file logging is on)
        level: Log level (Config.LOG_LEVEL if None)

    Returns:
        The logger, with its handlers replaced
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, (level or Config.LOG_LEVEL).upper()))

    logger.handlers.clear()
    logger.propagate = False
    job_filter = JobFilter()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.INFO if name == APP_LOGGER else logging.WARNING)
    console_handler.setFormatter(logging.Formatter('%(levelname)s - %(message)s'))
    console_handler.addFilter(job_filter)
    logger.addHandler(console_handler)

    file_path = log_file or (Config.LOG_FILE if Config.LOG_TO_FILE else None)
    if file_path:
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = RotatingFileHandler(
            file_path,
            maxBytes=Config.LOG_MAX_BYTES,
            backupCount=Config.LOG_BACKUP_COUNT
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - [%(job)s] %(funcName)s:%(lineno)d - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        file_handler.addFilter(job_filter)
        logger.addHandler(file_handler)

    return logger


def log_exception(logger: logging.Logger, exc: Exception, context: str = "", level: int = logging.ERROR):
    """
    Log an exception with context and traceback

    Args:
        logger: Target logger
        exc: The caught exception
        context: Additional context string (relation, command, ...)
        level: Log level; failed checks use WARNING, the run goes on
    """
    message = f"{type(exc).__name__}: {exc}"
    logger.log(level, f"{context}: {message}" if context else message, exc_info=True)
