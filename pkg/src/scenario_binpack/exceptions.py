#!/usr/bin/env python3
"""Custom exceptions for scenario-binpack."""
from __future__ import annotations

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .models import ValidationReport


class BppsError(Exception):
    """Base exception for scenario-binpack."""
    pass


class InstanceFormatError(BppsError):
    """Raised when an instance file cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InfeasibleSolutionError(BppsError):
    """Raised when an operation needs a feasible solution and gets another."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__(f"infeasible solution: {report.summary()}")


class InvalidParameterError(BppsError, ValueError):
    """Raised when a parameter is outside its valid range."""
    pass


class SolverError(BppsError):
    """Raised when a solver hits an unrecoverable numerical failure."""
    pass
