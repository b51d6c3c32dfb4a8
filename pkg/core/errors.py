# core/errors.py
"""
Exception hierarchy for ballot parsing, geometry and method evaluation.

All errors derive from ValueError so callers that only care about
"bad input" can keep catching ValueError.
"""
from typing import Optional


class SFBCError(ValueError):
    """Root of every error raised by the framework."""


class EmptyElectorateError(SFBCError):
    """Raised when a profile with zero voters is normalized or evaluated."""

    def __init__(self, message: str = "empty electorate: profile has no voters"):
        super().__init__(message)


class RankingParseError(SFBCError):
    """Raised for malformed ranking, profile, vector or method text."""

    def __init__(self, message: str, line: Optional[int] = None, text: Optional[str] = None):
        self.reason = message
        self.line = line
        self.text = text
        if line is not None:
            message = f"line {line}: {message}"
        if text is not None:
            message = f"{message} ({text!r})"
        super().__init__(message)

    def at_line(self, line: int) -> "RankingParseError":
        """Same error reported against an enclosing file's line."""
        return RankingParseError(self.reason, line=line, text=self.text)


class DimensionMismatchError(SFBCError):
    """Raised when a profile and a vector live in different ballot spaces."""


class InvalidSwapError(SFBCError):
    """Raised for a swap operator whose two candidates coincide."""


class InvalidParameterError(SFBCError):
    """Raised for out-of-range method, weight or scope parameters."""


class MethodStructureError(SFBCError):
    """Raised when a method is rejected at construction time."""


class MutualExclusivityError(SFBCError):
    """Raised when one stage elects several candidates at once."""


class IndecisiveMethodError(SFBCError):
    """Raised when a method produces no winner and cannot break the tie."""


class WeightFitError(SFBCError):
    """Raised when a stage vector is not the difference of two point totals."""
