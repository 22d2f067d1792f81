import logging
import sys
import threading
import time
import traceback
import uuid
from datetime import datetime
from functools import wraps
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import structlog

_SHARED_PROCESSORS = [
    structlog.contextvars.merge_contextvars,
    structlog.stdlib.add_logger_name,
    structlog.stdlib.add_log_level,
    structlog.processors.TimeStamper(fmt='iso'),
]


def _configure_structlog():
    structlog.configure(
        processors=_SHARED_PROCESSORS + [
            structlog.processors.StackInfoRenderer(),
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


_configure_structlog()


def structured_formatter() -> logging.Formatter:
    """JSON lines for the log files."""
    return structlog.stdlib.ProcessorFormatter(
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(sort_keys=True),
        ],
        foreign_pre_chain=_SHARED_PROCESSORS,
    )


def console_formatter() -> logging.Formatter:
    return structlog.stdlib.ProcessorFormatter(
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        foreign_pre_chain=_SHARED_PROCESSORS,
    )


class PerformanceLogger:
    """Aggregates durations and processed item counts per operation."""

    def __init__(self):
        self.metrics = {}
        self.lock = threading.Lock()

    def record_operation(self, operation: str, duration: float, success: bool = True, items: int = 0):
        """Record one operation; ``duration`` is in milliseconds."""
        with self.lock:
            if operation not in self.metrics:
                self.metrics[operation] = {
                    'count': 0,
                    'total_duration': 0.0,
                    'avg_duration': 0.0,
                    'min_duration': float('inf'),
                    'max_duration': 0.0,
                    'success_count': 0,
                    'error_count': 0,
                    'items': 0,
                    'items_per_second': 0.0,
                }

            metric = self.metrics[operation]
            metric['count'] += 1
            metric['total_duration'] += duration
            metric['avg_duration'] = metric['total_duration'] / metric['count']
            metric['min_duration'] = min(metric['min_duration'], duration)
            metric['max_duration'] = max(metric['max_duration'], duration)
            metric['items'] += items
            if metric['total_duration'] > 0:
                metric['items_per_second'] = metric['items'] / (metric['total_duration'] / 1000.0)

            if success:
                metric['success_count'] += 1
            else:
                metric['error_count'] += 1

    def get_metrics(self, operation: Optional[str] = None) -> Dict[str, Any]:
        with self.lock:
            if operation:
                return dict(self.metrics.get(operation, {}))
            return {name: dict(values) for name, values in self.metrics.items()}

    def reset_metrics(self, operation: Optional[str] = None):
        with self.lock:
            if operation:
                self.metrics.pop(operation, None)
            else:
                self.metrics.clear()


class EnhancedLogger:
    """Structured logging with run context and performance monitoring."""

    def __init__(self, name: str = 'bnrobot'):
        self.name = name
        self.logger = structlog.get_logger(name)
        self.performance_logger = PerformanceLogger()
        self._configured = False

    def setup(self, level: str = 'INFO', log_dir: Optional[str] = 'logs',
              max_bytes: int = 10 * 1024 * 1024, backup_count: int = 5):
        """
        Attach handlers to the package logger.

        Args:
            level: Console level name.
            log_dir: Directory for the rotating JSON files; None disables file logging.
            max_bytes: Rotation size of the main log file.
            backup_count: Number of rotated files kept.
        """
        root = logging.getLogger(self.name)
        for handler in list(root.handlers):
            root.removeHandler(handler)
            handler.close()
        perf = logging.getLogger(f'{self.name}.performance')
        for handler in list(perf.handlers):
            perf.removeHandler(handler)
            handler.close()

        root.setLevel(logging.DEBUG)
        root.propagate = False

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(getattr(logging, level.upper(), logging.INFO))
        console_handler.setFormatter(console_formatter())
        root.addHandler(console_handler)

        if log_dir:
            directory = Path(log_dir)
            directory.mkdir(parents=True, exist_ok=True)

            main_handler = RotatingFileHandler(directory / 'bnrobot.log', maxBytes=max_bytes,
                                               backupCount=backup_count)
            main_handler.setLevel(logging.DEBUG)
            main_handler.setFormatter(structured_formatter())
            root.addHandler(main_handler)

            error_handler = RotatingFileHandler(directory / 'errors.log', maxBytes=max_bytes // 2,
                                                backupCount=max(1, backup_count // 2))
            error_handler.setLevel(logging.ERROR)
            error_handler.setFormatter(structured_formatter())
            root.addHandler(error_handler)

            perf_handler = RotatingFileHandler(directory / 'performance.log', maxBytes=max_bytes // 2,
                                               backupCount=max(1, backup_count // 2))
            perf_handler.setLevel(logging.INFO)
            perf_handler.setFormatter(structured_formatter())
            perf.addHandler(perf_handler)

        self._configured = True

    def set_run_id(self, run_id: Optional[str] = None) -> str:
        """Bind a run id to every record emitted from the current context."""
        if run_id is None:
            run_id = uuid.uuid4().hex
        structlog.contextvars.bind_contextvars(run_id=run_id)
        return run_id

    def get_run_id(self) -> Optional[str]:
        return structlog.contextvars.get_contextvars().get('run_id')

    def clear_run_id(self):
        structlog.contextvars.unbind_contextvars('run_id')

    def run_context(self, run_id: str):
        """Bind ``run_id`` inside a ``with`` block; the enclosing id comes back on exit."""
        return structlog.contextvars.bound_contextvars(run_id=run_id)

    def debug(self, message: str, **kwargs):
        self.logger.debug(message, **kwargs)

    def info(self, message: str, **kwargs):
        self.logger.info(message, **kwargs)

    def warning(self, message: str, **kwargs):
        self.logger.warning(message, **kwargs)

    def error(self, message: str, error: Optional[Exception] = None, **kwargs):
        if error:
            kwargs['error'] = str(error)
            kwargs['error_type'] = type(error).__name__
            kwargs['traceback'] = traceback.format_exc()
        self.logger.error(message, **kwargs)

    def critical(self, message: str, error: Optional[Exception] = None, **kwargs):
        if error:
            kwargs['error'] = str(error)
            kwargs['error_type'] = type(error).__name__
            kwargs['traceback'] = traceback.format_exc()
        self.logger.critical(message, **kwargs)

    def log_performance(self, operation: str, duration: float, success: bool = True,
                        items: int = 0, **kwargs):
        """Record and emit one performance sample (``duration`` in ms)."""
        self.performance_logger.record_operation(operation, duration, success, items)
        structlog.get_logger(f'{self.name}.performance').info(
            'performance', operation=operation, duration_ms=round(duration, 3),
            success=success, items=items, **kwargs)

    def get_performance_metrics(self, operation: Optional[str] = None) -> Dict[str, Any]:
        return self.performance_logger.get_metrics(operation)


# Global enhanced logger instance
enhanced_logger = EnhancedLogger()


def performance_monitor(operation_name: str):
    """
    Decorator to monitor function performance.

    Args:
        operation_name: Name of the operation for metrics
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            success = True
            try:
                enhanced_logger.debug('operation started', operation=operation_name)
                return func(*args, **kwargs)
            except Exception as e:
                success = False
                enhanced_logger.error('operation failed', error=e, operation=operation_name)
                raise
            finally:
                duration = (time.perf_counter() - start_time) * 1000
                enhanced_logger.log_performance(operation_name, duration, success)

        return wrapper
    return decorator


def log_startup_info(command: str, **kwargs):
    enhanced_logger.info('bnrobot starting', command=command,
                         startup_time=datetime.now().isoformat(),
                         python_version=sys.version.split()[0],
                         platform=sys.platform, **kwargs)


def log_shutdown_info(command: str):
    enhanced_logger.info('bnrobot shutting down', command=command,
                         shutdown_time=datetime.now().isoformat(),
                         operations=sorted(enhanced_logger.get_performance_metrics()))
