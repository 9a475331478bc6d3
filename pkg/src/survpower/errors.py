"""Exception hierarchy shared across the engine.

The three broad families map onto the CLI exit codes and HTTP statuses:
payload/schema problems (exit 2 / HTTP 400), numeric-domain problems
(exit 3 / HTTP 422), and iterative-procedure failures (exit 4 / HTTP 422).
"""


class SurvPowerError(Exception):
    """Base class for all engine errors."""


class PayloadError(SurvPowerError):
    """A request document is malformed or violates its schema."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DomainError(SurvPowerError, ValueError):
    """Inputs are outside the mathematical domain of an operation."""


class ExistenceError(DomainError):
    """A requested moment does not exist for the given Beta parameters."""


class InfiniteVarianceError(DomainError):
    """The inverse-propensity mean is infinite (a <= 1 or b <= 1).

    Carries ``min_phi``, the smallest overlap coefficient at the given
    treatment proportion for which the variance is finite.
    """

    def __init__(self, message, min_phi):
        super().__init__(message)
        self.min_phi = min_phi


class DegenerateDataError(DomainError):
    """A dataset cannot support the requested estimate (empty arm, no events...)."""


class RankDeficiencyError(DomainError):
    """A design matrix is rank deficient."""


class ConvergenceError(SurvPowerError):
    """An iterative solver failed to converge."""


class SeparationError(ConvergenceError):
    """Monotone likelihood: the data perfectly (or quasi-) separate the classes."""


class CalibrationError(ConvergenceError):
    """A calibration root-find could not bracket or reach its target."""
