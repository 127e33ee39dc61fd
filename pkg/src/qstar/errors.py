"""Exception and warning types raised by qstar."""
from __future__ import annotations


class QStarError(Exception):
    """Base class for all qstar errors."""


class ConfigError(QStarError):
    """Invalid user configuration (CLI exit status 2)."""


class ComputeError(QStarError):
    """A numerical step failed (CLI exit status 1)."""


class NonPositiveLength(ConfigError):
    pass


class EmptyGraph(ConfigError):
    pass


class BadRange(ConfigError):
    pass


class BondOutOfRange(ConfigError):
    pass


class PositionOutOfRange(ConfigError):
    pass


class DomainError(ConfigError):
    pass


class BadEpsilon(ConfigError):
    pass


class PoleProximity(ComputeError):
    pass


class CoincidentPoles(ComputeError):
    pass


class NoConvergence(ComputeError):
    pass


class UnnormalizableState(ComputeError):
    pass


class QuadratureFailure(ComputeError):
    pass


class TrapFailed(ComputeError):
    pass


class BudgetExhausted(ComputeError):
    """The search budget ran out; ``partial`` holds whatever was found."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = list(partial or [])


class RationalLengthWarning(UserWarning):
    """Two bond lengths are (numerically) in a small-denominator rational ratio."""


class AccuracyLoss(UserWarning):
    """Two evaluation routes disagree by more than the advertised tolerance."""
