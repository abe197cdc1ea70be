#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Error handling utilities for setreg
"""

import traceback
from functools import wraps
from typing import Any, Callable

from ..core.exceptions import (
    SetRegError, InputError, SceneParseError, DimensionMismatchError,
    NotInIntersectionError, InfeasiblePolyhedronError, PreconditionError,
    ConfigurationError, EstimatorDiagnostic, CheckFailure
)
from .logger import get_logger


EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_DIAGNOSTIC = 3
EXIT_RUNTIME_ERROR = 4
EXIT_INTERRUPTED = 130


class ErrorHandler:
    """Centralized error handling"""

    def __init__(self):
        self.logger = get_logger(__name__)

    def handle_error(self, error: Exception, context: str = "") -> str:
        """
        Log an exception and return a one-line message for the user

        Args:
            error: The exception that occurred
            context: Where the error occurred

        Returns:
            User-facing error message
        """
        full_msg = self.format_message(error, context)
        self.logger.error(f"{context or '错误'}: {error}")
        self.logger.debug(f"Traceback: {traceback.format_exc()}")
        return full_msg

    def format_message(self, error: Exception, context: str = "") -> str:
        """One-line user message, without logging"""
        error_msg = self._get_error_message(error)
        return f"{context}: {error_msg}" if context else error_msg

    def _get_error_message(self, error: Exception) -> str:
        """Get appropriate error message for different exception types"""
        if isinstance(error, NotInIntersectionError):
            return f"x̄ not in intersection (set {error.index}, distance {error.distance:.3e})"
        elif isinstance(error, SceneParseError):
            return f"scene file invalid: {error}"
        elif isinstance(error, DimensionMismatchError):
            return f"dimension mismatch: expected {error.expected}, got {error.actual}"
        elif isinstance(error, InfeasiblePolyhedronError):
            return f"infeasible polyhedron: {error}"
        elif isinstance(error, PreconditionError):
            return f"precondition violated: {error}"
        elif isinstance(error, ConfigurationError):
            return f"configuration error: {error}"
        elif isinstance(error, EstimatorDiagnostic):
            return f"numerical diagnostic [{error.kind}]: {error.detail}"
        elif isinstance(error, CheckFailure):
            return str(error)
        elif isinstance(error, FileNotFoundError):
            return f"file not found: {error.filename}"
        elif isinstance(error, OSError):
            return f"system error: {error.strerror}"
        else:
            return f"unexpected error: {error}"


def exit_code_for(error: BaseException) -> int:
    """Map an exception onto the stable CLI exit codes

    Only CheckFailure means a failed check; artifact write failures and unexpected
    errors get EXIT_RUNTIME_ERROR.
    """
    if isinstance(error, KeyboardInterrupt):
        return EXIT_INTERRUPTED
    if isinstance(error, (InputError, ConfigurationError, FileNotFoundError)):
        return EXIT_INPUT_ERROR
    if isinstance(error, EstimatorDiagnostic):
        return EXIT_DIAGNOSTIC
    if isinstance(error, CheckFailure):
        return EXIT_CHECK_FAILED
    return EXIT_RUNTIME_ERROR


def error_handler(context: str = ""):
    """
    Decorator for error handling

    SetRegError subclasses are re-raised unchanged; any other exception is wrapped in
    SetRegError.  Nothing is logged here: the caller that finally handles the error
    logs it once.

    Args:
        context: Context description for error messages
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            try:
                return func(*args, **kwargs)
            except (SetRegError, FileNotFoundError):
                raise
            except Exception as e:
                raise SetRegError(ErrorHandler().format_message(e, context)) from e
        return wrapper
    return decorator
