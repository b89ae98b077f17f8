"""
Exception hierarchy shared by every module.

The CLI maps these onto exit codes: usage, domain and resource errors
exit with 2, numerical failures with 3.
"""

from typing import Any, Optional


class OneShotError(Exception):
    """Base class for all errors raised by the package."""


class UsageError(OneShotError, ValueError):
    """Malformed input: shape mismatch, empty factor set, bad projectors."""


class DomainError(OneShotError, ValueError):
    """Parameters outside the mathematical domain of an operation."""


class ResourceError(OneShotError, MemoryError):
    """A configured size cap would be exceeded."""


class NumericalFailure(OneShotError, ArithmeticError):
    """
    A numerical routine did not converge.

    Args:
        message: Human readable description.
        best: Best iterate reached before giving up (solver specific).
    """

    def __init__(self, message: str, best: Optional[Any] = None):
        super().__init__(message)
        self.best = best
