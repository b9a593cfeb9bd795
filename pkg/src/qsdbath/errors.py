"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2,
numerical failures exit 3, I/O failures exit 4.
"""


class QsdError(Exception):
    """Base class for all package errors."""


class ConfigError(QsdError):
    """Invalid configuration text or inconsistent parameter set."""


class SpectrumError(QsdError):
    """Eigenbasis construction failed."""


class GridTooCoarseError(SpectrumError):
    """Adjacent levels cannot be separated on the requested grid."""


class MissingLevelError(SpectrumError):
    """Node counts skipped an integer while scanning for levels."""


class NumericalInstabilityError(QsdError):
    """A trajectory exceeded the overflow guard (step size too large)."""

    def __init__(self, message: str, realization_index: int | None = None):
        super().__init__(message)
        self.realization_index = realization_index


class ConvergenceError(QsdError):
    """A reference computation failed its convergence check."""


class FitDomainError(QsdError):
    """Fit input violates the model domain (non-positive data, too few points)."""
