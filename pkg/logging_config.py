"""
Logging configuration for the domain-wall engine.
Structured JSON logs on stderr; stdout is reserved for reports.
"""

import logging
import logging.handlers
import os
import socket
import sys
import threading
import time
from functools import wraps
from typing import Any, Callable, Dict, Optional

from pythonjsonlogger import jsonlogger

LOG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'logs')


class CustomJsonFormatter(jsonlogger.JsonFormatter):
    """Custom JSON formatter with additional fields."""

    def add_fields(self, log_record: Dict[str, Any], record: logging.LogRecord, message_dict: Dict[str, Any]) -> None:
        super().add_fields(log_record, record, message_dict)

        log_record['timestamp'] = time.strftime('%Y-%m-%dT%H:%M:%SZ', time.gmtime(record.created))
        log_record['hostname'] = socket.gethostname()
        log_record['process'] = record.process
        log_record['threadName'] = record.threadName
        log_record['level'] = record.levelname
        log_record['module'] = record.module
        log_record['function'] = record.funcName
        log_record['line'] = record.lineno

        # fields passed as extra={'extra_fields': {...}}
        extra_fields = getattr(record, 'extra_fields', None)
        if extra_fields:
            log_record.pop('extra_fields', None)
            log_record.update(extra_fields)


class LoggerConfig:
    """Configuration for the engine's logging handlers."""

    def __init__(
        self,
        app_name: str = 'walls',
        log_level: str = 'WARNING',
        enable_file_logging: bool = False,
        enable_json: bool = True,
        max_bytes: int = 10485760,  # 10MB
        backup_count: int = 5,
        stream=None,
    ):
        """Initialize logging configuration.

        Args:
            app_name: Root logger name; modules log under ``<app_name>.<module>``
            log_level: Minimum log level to record
            enable_file_logging: Whether to also write a rotating log file
            enable_json: Whether to use JSON formatting
            max_bytes: Maximum size of each log file
            backup_count: Number of backup files to keep
            stream: Console stream, stderr by default
        """
        self.app_name = app_name
        self.log_level = getattr(logging, log_level.upper())
        self.enable_file_logging = enable_file_logging
        self.enable_json = enable_json
        self.max_bytes = max_bytes
        self.backup_count = backup_count
        self.stream = stream or sys.stderr

        self.logger = logging.getLogger(app_name)
        self.logger.setLevel(self.log_level)
        self.logger.handlers = []
        self.logger.propagate = False

        self._setup_handlers()

    def _setup_handlers(self):
        if self.enable_json:
            formatter = CustomJsonFormatter('%(timestamp)s %(level)s %(name)s %(message)s')
        else:
            formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

        console_handler = logging.StreamHandler(self.stream)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        if self.enable_file_logging:
            os.makedirs(LOG_DIR, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                os.path.join(LOG_DIR, f'{self.app_name}.log'),
                maxBytes=self.max_bytes,
                backupCount=self.backup_count
            )
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

    def get_logger(self) -> logging.Logger:
        return self.logger


class PerformanceProfiler:
    """Context manager and decorator for timing an operation"""

    def __init__(self, logger: logging.Logger, operation: str, **fields):
        self.logger = logger
        self.operation = operation
        self.fields = fields
        self.start_time: Optional[float] = None
        self.duration: Optional[float] = None
        self.thread_id = threading.get_ident()

    def __enter__(self):
        self.start_time = time.perf_counter()
        self.logger.debug(f'Starting operation: {self.operation}',
                          extra={'extra_fields': {'operation': self.operation, 'event': 'start', **self.fields}})
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration = time.perf_counter() - self.start_time
        extra = {
            'operation': self.operation,
            'duration': self.duration,
            'thread_id': self.thread_id,
            'event': 'end',
            **self.fields,
        }
        if exc_type:
            extra['error'] = str(exc_val)
            self.logger.error(f'Operation failed: {self.operation}', extra={'extra_fields': extra})
        else:
            self.logger.debug(f'Completed operation: {self.operation} in {self.duration:.3f}s',
                              extra={'extra_fields': extra})
        return False

    @classmethod
    def profile(cls, logger: logging.Logger):
        """Decorator for performance profiling"""
        def decorator(func: Callable):
            @wraps(func)
            def wrapper(*args, **kwargs):
                with cls(logger, func.__name__):
                    return func(*args, **kwargs)
            return wrapper
        return decorator


def init_logging(
    app_name: str = 'walls',
    log_level: str = 'WARNING',
    enable_file_logging: bool = False,
    enable_json: bool = True,
    max_bytes: int = 10485760,
    backup_count: int = 5,
    stream=None,
) -> logging.Logger:
    """Initialize the logging system and return the root engine logger."""
    return LoggerConfig(
        app_name=app_name,
        log_level=log_level,
        enable_file_logging=enable_file_logging,
        enable_json=enable_json,
        max_bytes=max_bytes,
        backup_count=backup_count,
        stream=stream,
    ).get_logger()
