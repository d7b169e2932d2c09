"""Exception hierarchy shared by the solver, analysis and CLI layers."""

from __future__ import annotations


class InvasionLabError(Exception):
    """Base class for every error raised by invasion_lab."""


class ModelSpecError(InvasionLabError, ValueError):
    """Bad model name or parameter. ``key`` names the offending entry."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class AssumptionViolation(InvasionLabError):
    """A structural hypothesis on the kinetics does not hold."""


class NotMonostableError(AssumptionViolation):
    pass


class SpeedBelowMinimum(InvasionLabError, ValueError):
    """Requested wave speed is below the linear speed c*."""


class CFLViolation(InvasionLabError, ValueError):
    pass


class BlowUpError(InvasionLabError, FloatingPointError):
    """Non-finite values appeared in a field or evaluator output."""

    def __init__(self, message: str, t: float | None = None, node: int | None = None):
        super().__init__(message)
        self.t = t
        self.node = node


class FrontNotPresent(InvasionLabError):
    pass


class WindowError(InvasionLabError):
    """An analysis window does not fit inside the computational grid."""


class DegenerateFitError(InvasionLabError, ValueError):
    pass


class ConfigError(InvasionLabError, ValueError):
    """Configuration file does not match its schema or cannot be resolved."""
