"""
Logging utilities for the harmonic normality toolkit.

Structured events are rendered by structlog as JSON lines into the run's log file;
plain messages are mirrored to the console through the stdlib logging module.
"""

import logging
import os
import sys
import threading
from typing import Any, Dict, Optional

import structlog


# Global file lock for thread-safe logging
_file_locks: Dict[str, threading.Lock] = {}
_file_locks_lock = threading.Lock()


class _LockedFile:
    """File-like wrapper that appends whole lines under a per-path lock.

    print() writes the record and its newline separately; partial writes are
    held per thread until the newline arrives.
    """

    def __init__(self, path: str, lock: threading.Lock):
        self.path = path
        self.lock = lock
        self._pending = threading.local()

    def write(self, text: str) -> None:
        buffered = getattr(self._pending, 'text', '') + text
        if not buffered.endswith('\n'):
            self._pending.text = buffered
            return
        self._pending.text = ''
        with self.lock:
            with open(self.path, 'a', encoding='utf-8') as f:
                f.write(buffered)

    def flush(self) -> None:
        pass


_PROCESSORS = [
    structlog.processors.add_log_level,
    structlog.processors.TimeStamper(fmt="iso"),
    structlog.processors.JSONRenderer(sort_keys=True),
]


def _file_lock(path: str) -> threading.Lock:
    with _file_locks_lock:
        if path not in _file_locks:
            _file_locks[path] = threading.Lock()
        return _file_locks[path]


def configure_structlog(log_file: Optional[str], level: int) -> None:
    """Route module-level ``structlog.get_logger`` events into the run's log file.

    Without a log file events go to stderr. Loggers are not cached, so module
    loggers created at import time follow the most recent configuration.
    """
    sink = sys.stderr if log_file is None else _LockedFile(log_file, _file_lock(log_file))
    structlog.configure(
        processors=_PROCESSORS,
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(sink),
        cache_logger_on_first_use=False,
    )


class AnalysisLogger:
    """Logger with JSON-lines file output and console mirror."""

    def __init__(self, config, name: str):
        """Initialize logger."""
        self.config = config
        self.name = name
        self.log_file = config.log_file

        log_dir = os.path.dirname(self.log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)

        self._file_lock = _file_lock(self.log_file)

        level = getattr(logging, config.log_level.upper(), logging.INFO)

        self._events = structlog.wrap_logger(
            structlog.PrintLogger(_LockedFile(self.log_file, self._file_lock)),
            processors=_PROCESSORS,
            wrapper_class=structlog.make_filtering_bound_logger(level),
        ).bind(logger=name)
        configure_structlog(self.log_file, level)

        # Console mirror
        self.logger = logging.getLogger(name)
        self.logger.setLevel(level)
        self.logger.propagate = False
        self.logger.handlers.clear()
        if getattr(config, 'console_logging', True):
            self._setup_handlers()

    def _setup_handlers(self):
        """Setup console handler (file logging goes through structlog)."""
        console_handler = logging.StreamHandler()
        console_handler.setLevel(logging.INFO)
        console_formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        console_handler.setFormatter(console_formatter)

        self.logger.addHandler(console_handler)

    def info(self, message: str, **kwargs: Any):
        """Log info message with optional structured data."""
        self._log_with_context('info', message, **kwargs)

    def warning(self, message: str, **kwargs: Any):
        """Log warning message with optional structured data."""
        self._log_with_context('warning', message, **kwargs)

    def error(self, message: str, **kwargs: Any):
        """Log error message with optional structured data."""
        self._log_with_context('error', message, **kwargs)

    def debug(self, message: str, **kwargs: Any):
        """Log debug message with optional structured data."""
        self._log_with_context('debug', message, **kwargs)

    def _log_with_context(self, level: str, message: str, **kwargs: Any):
        """Log message with structured context."""
        try:
            getattr(self._events, level)(message, **kwargs)
        except OSError:
            pass  # Ignore file write errors

        getattr(self.logger, level)(message)

    def close_log_file(self):
        """Flush console handlers; JSON lines need no closing bracket."""
        for handler in self.logger.handlers:
            handler.flush()

    def get_log_file_path(self) -> str:
        """Get the absolute path to the log file."""
        return os.path.abspath(self.log_file)


def get_logger(config, name: str) -> AnalysisLogger:
    """Get a logger instance."""
    return AnalysisLogger(config, name)
