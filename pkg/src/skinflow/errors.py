"""Exception hierarchy for the toolkit.

``SkinflowError`` is the common base; ``NumericalError`` groups failures of
the numerical machinery (as opposed to bad configuration), so CLI code can
map them to a distinct exit status after flushing partial output.
"""
from __future__ import annotations

__all__ = [
    "SkinflowError",
    "NumericalError",
    "StepSizeUnderflow",
    "MaxLengthExceeded",
    "OutOfSpan",
    "DegenerateTrajectory",
    "InsufficientEvents",
    "NoReturn",
    "NoConvergence",
    "StepUnderflow",
    "NoFoldInBranch",
    "BracketInvalid",
    "UndecidedAtMidpoint",
    "QuadratureFailure",
    "ConfigError",
    "UnknownFigure",
]


class SkinflowError(Exception):
    """Base class for all toolkit errors."""


class NumericalError(SkinflowError):
    """A numerical procedure failed (integrator, Newton, bisection...)."""


class StepSizeUnderflow(NumericalError):
    """The adaptive integrator drove its step size below the working floor."""


class MaxLengthExceeded(NumericalError):
    """Requested integration span exceeds the configured hard cap."""


class OutOfSpan(SkinflowError):
    """Dense evaluation requested outside the trajectory's span."""


class DegenerateTrajectory(SkinflowError):
    """Trajectory is identically zero; participation measures are undefined."""


class InsufficientEvents(SkinflowError):
    """Not enough recorded events to form the requested estimate."""


class NoReturn(NumericalError):
    """Trajectory never returned to the section within the allowed span."""

    def __init__(self, message: str, decayed: bool = False):
        super().__init__(message)
        self.decayed = decayed


class NoConvergence(NumericalError):
    """Newton iteration exhausted its iteration budget."""


class StepUnderflow(NumericalError):
    """Continuation step size shrank below the admissible floor."""


class NoFoldInBranch(SkinflowError):
    """The branch contains no tangent-direction reversal to refine."""


class BracketInvalid(SkinflowError):
    """Bisection endpoints do not straddle the two basins."""

    def __init__(self, message: str, lo_outcome: str | None = None,
                 hi_outcome: str | None = None):
        super().__init__(message)
        self.lo_outcome = lo_outcome
        self.hi_outcome = hi_outcome


class UndecidedAtMidpoint(NumericalError):
    """Classification stayed undecided at a bisection midpoint.

    Carries the narrowed bracket so callers can inspect or resume.
    """

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(message)
        self.bracket = bracket


class QuadratureFailure(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ConfigError(SkinflowError):
    """Invalid run configuration (unknown key, bad value, missing section)."""


class UnknownFigure(SkinflowError):
    """Figure identifier not in the reproduction registry."""
