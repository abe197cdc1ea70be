#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Logging setup for setreg.

The console handler writes to stdout unless a stream is given; the command line
passes stderr so that results on stdout stay machine readable. A rotating UTF-8
file handler is added when a log file is configured.
"""

import sys
import time
import logging
import logging.handlers
from functools import wraps
from pathlib import Path
from typing import IO, Optional

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(name)s - %(message)s'
SHORT_FORMAT = '%(levelname)s - %(name)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def _is_terminal(stream: Optional[IO]) -> bool:
    isatty = getattr(stream, 'isatty', None)
    try:
        return bool(isatty and isatty())
    except ValueError:  # closed stream
        return False


class UTF8Formatter(logging.Formatter):
    """Formatter with optional ANSI colours per level"""

    COLORS = {
        'DEBUG': '\033[36m',
        'INFO': '\033[32m',
        'WARNING': '\033[33m',
        'ERROR': '\033[31m',
        'CRITICAL': '\033[35m',
    }
    RESET = '\033[0m'

    def __init__(self, use_colors: bool = True, include_timestamp: bool = True):
        super().__init__(LOG_FORMAT if include_timestamp else SHORT_FORMAT, DATE_FORMAT)
        self.use_colors = use_colors
        self.include_timestamp = include_timestamp

    def format(self, record: logging.LogRecord) -> str:
        text = super().format(record)
        color = self.COLORS.get(record.levelname) if self.use_colors else None
        return f"{color}{text}{self.RESET}" if color else text


def setup_logging(
    level: str = 'INFO',
    log_file: Optional[str] = None,
    max_bytes: int = 10 * 1024 * 1024,  # 10MB
    backup_count: int = 5,
    use_colors: bool = True,
    stream: Optional[IO] = None
) -> logging.Logger:
    """
    Setup logging configuration

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Path to log file (optional)
        max_bytes: Maximum log file size
        backup_count: Number of backup files to keep
        use_colors: Colour console output when the stream is a terminal
        stream: Console stream, stdout by default

    Returns:
        Root logger instance
    """
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
        handler.close()

    numeric_level = getattr(logging, level.upper(), logging.INFO)
    root_logger.setLevel(numeric_level)

    stream = stream or sys.stdout
    console_handler = logging.StreamHandler(stream)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(UTF8Formatter(use_colors=use_colors and _is_terminal(stream)))
    root_logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.handlers.RotatingFileHandler(
            log_path,
            maxBytes=max_bytes,
            backupCount=backup_count,
            encoding='utf-8'
        )
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(UTF8Formatter(use_colors=False))
        root_logger.addHandler(file_handler)

    return root_logger


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)


def log_function_call(logger: logging.Logger):
    """
    Decorator for estimator entry points.

    Logs the call and its duration at DEBUG; an exception is logged at ERROR and
    re-raised. Durations only go to the log, never into result files.
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            logger.debug(f"调用 {func.__name__}")
            started = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error(f"{func.__name__} 抛出异常: {e}")
                raise
            logger.debug(f"{func.__name__} 完成, 耗时 {time.perf_counter() - started:.3f}s")
            return result
        return wrapper
    return decorator
