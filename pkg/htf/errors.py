"""Exception hierarchy for the htf package.

Every error derives from ``HtfError`` and from the builtin that best
describes it, so callers can catch either.  The CLI maps ``ValueError``
subclasses to exit code 2 and ``RuntimeError`` subclasses to exit code 1.
"""
from __future__ import annotations

from typing import Any


class HtfError(Exception):
    """Base class for all htf errors."""


class InvalidArgumentError(HtfError, ValueError):
    """A precondition on an argument does not hold."""


class DegenerateSupportError(HtfError, ValueError):
    """The support interval has zero width."""


class DimensionError(HtfError, ValueError):
    """Operator and vector sizes are incompatible."""


class UnboundedProblemError(HtfError, ValueError):
    """The penalized problem has no minimizer (tau=0 with an empty bin)."""


class DegenerateSampleError(HtfError, ValueError):
    """The sample has no spread, or every CV fold is degenerate."""


class SchemaError(HtfError, ValueError):
    """A serialized estimate has a missing or unsupported version."""


class EstimateValidationError(HtfError, ValueError):
    """A serialized estimate violates a field invariant."""


class ConvergenceError(HtfError, RuntimeError):
    """A fit stopped at max_iters without meeting its KKT tolerance."""

    def __init__(self, message: str, fit: Any = None) -> None:
        super().__init__(message)
        self.fit = fit


class PathFailureError(HtfError, RuntimeError):
    """No fit on a tuning path converged."""

    def __init__(self, message: str, path: Any = None) -> None:
        super().__init__(message)
        self.path = path
