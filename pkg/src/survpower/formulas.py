"""Closed-form design variances, sample sizes, and comparator formulas.

All variances are asymptotic unit-scale quantities ``V`` such that
``Var(tau_hat) ~ V / n`` for ``n`` enrolled units, or event-scale analogues
with ``V_events = V_units * d`` where ``d`` is the combined event rate.
Everything here is a pure function of its arguments.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy.special import ndtr, ndtri

from .errors import DomainError

UNITS = "units"
EVENTS = "events"

# ceil() guard so that exact-integer products (e.g. 1.25 * 100.0) do not
# round up on the last ulp
_CEIL_FUZZ = 1e-12


def _check_rate(name, value):
    if not (0.0 < value <= 1.0):
        raise DomainError(f"{name} must lie in (0, 1], got {value!r}")


def _check_open_unit(name, value):
    if not (0.0 < value < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {value!r}")


class LambdaPair(NamedTuple):
    """Square-root-scale treated/control risk-set factors; lambda1 * lambda0 == 1."""

    lambda1: float
    lambda0: float


@dataclass(frozen=True)
class Variance:
    """An asymptotic variance tagged with its scale ("units" or "events")."""

    value: float
    scale: str = UNITS

    def __post_init__(self):
        if self.scale not in (UNITS, EVENTS):
            raise DomainError(f"unknown variance scale {self.scale!r}")
        if not (self.value > 0.0) or not math.isfinite(self.value):
            raise DomainError(f"variance must be positive and finite, got {self.value!r}")

    def to_units(self, d):
        """Convert to unit scale using the combined event rate ``d``."""
        _check_rate("d", d)
        if self.scale == UNITS:
            return self
        return Variance(self.value / d, UNITS)

    def to_events(self, d):
        """Convert to event scale using the combined event rate ``d``."""
        _check_rate("d", d)
        if self.scale == EVENTS:
            return self
        return Variance(self.value * d, EVENTS)


@dataclass(frozen=True)
class DesignInputs:
    """Design-stage summary of a two-arm survival study.

    r       treatment proportion in (0, 1)
    tau0    postulated log marginal hazard ratio (negative = protective)
    d1, d0  arm-specific observed event rates in (0, 1]
    alpha   significance level in (0, 1)
    power   target power in (alpha, 1)
    sides   1 for a one-sided Wald test (the default), 2 for two-sided
    """

    r: float
    tau0: float
    d1: float
    d0: float
    alpha: float = 0.05
    power: float = 0.8
    sides: int = 1

    def __post_init__(self):
        _check_open_unit("r", self.r)
        if not math.isfinite(self.tau0):
            raise DomainError("tau0 must be finite")
        _check_rate("d1", self.d1)
        _check_rate("d0", self.d0)
        _check_open_unit("alpha", self.alpha)
        _check_open_unit("power", self.power)
        if not self.alpha < self.power:
            raise DomainError("power must exceed alpha")
        if self.sides not in (1, 2):
            raise DomainError("sides must be 1 or 2")

    @classmethod
    def from_hr(cls, r, hr, d1, d0, **kwargs):
        if not (hr > 0.0):
            raise DomainError(f"hazard ratio must be positive, got {hr!r}")
        return cls(r=r, tau0=math.log(hr), d1=d1, d0=d0, **kwargs)

    @property
    def d(self):
        """Combined event rate r*d1 + (1-r)*d0."""
        return self.r * self.d1 + (1.0 - self.r) * self.d0


def lambda_pair(r, tau0):
    """lambda1 = sqrt(r/(1-r)) * exp(tau0/2) and its reciprocal lambda0."""
    _check_open_unit("r", r)
    if not math.isfinite(tau0):
        raise DomainError("tau0 must be finite")
    lam1 = math.sqrt(r / (1.0 - r)) * math.exp(tau0 / 2.0)
    return LambdaPair(lam1, 1.0 / lam1)


def v_rct(r, tau0, d1, d0):
    """Unit-scale variance for a randomized trial with arm-specific event rates.

    V = (lambda1+lambda0)^2 * [r*lambda0^2*d1 + (1-r)*lambda1^2*d0] / d^2,
    d = r*d1 + (1-r)*d0.  Valid at any postulated effect size.
    """
    _check_rate("d1", d1)
    _check_rate("d0", d0)
    lam1, lam0 = lambda_pair(r, tau0)
    d = r * d1 + (1.0 - r) * d0
    value = (lam1 + lam0) ** 2 * (r * lam0**2 * d1 + (1.0 - r) * lam1**2 * d0) / d**2
    return Variance(value, UNITS)


def v_rct_equal_censoring(r, tau0, d):
    """Reduced randomized-trial variance under equal censoring rates across arms."""
    _check_rate("d", d)
    lam1, lam0 = lambda_pair(r, tau0)
    value = (lam1 + lam0) ** 2 * (r * lam0**2 + (1.0 - r) * lam1**2) / d
    return Variance(value, UNITS)


def v_schoenfeld(r):
    """Event-scale log-rank variance 1/[r(1-r)]; no effect-size dependence."""
    _check_open_unit("r", r)
    return Variance(1.0 / (r * (1.0 - r)), EVENTS)


def v_freedman(r, tau0):
    """Event-scale log-rank variance with Freedman's mean-shift correction.

    v_schoenfeld(r) * [tau0*(1-r+r*exp(tau0)) / (1-exp(tau0))]^2.  At tau0 = 0
    the analytic limit equals v_schoenfeld(r) (continuity; the correction
    factor tends to 1).
    """
    _check_open_unit("r", r)
    if not math.isfinite(tau0):
        raise DomainError("tau0 must be finite")
    base = v_schoenfeld(r).value
    # limit branch also covers tau0 tiny enough that exp(tau0) rounds to 1
    if math.expm1(tau0) == 0.0:
        return Variance(base, EVENTS)
    factor = tau0 * (1.0 - r + r * math.exp(tau0)) / -math.expm1(tau0)
    return Variance(base * factor**2, EVENTS)


def ratio_schoenfeld(tau0):
    """Events required by the corrected variance relative to Schoenfeld's, at r = 1/2."""
    c = math.cosh(tau0)
    return c * (c + 1.0) / 2.0


def ratio_freedman(tau0):
    """Events required by the corrected variance relative to Freedman's, at r = 1/2."""
    c = math.cosh(tau0)
    if c == 1.0:  # includes tau0 small enough to round cosh to 1
        return 1.0
    return 2.0 * c * (c - 1.0) / tau0**2


def v_obs(r, tau0, d1, d0, beta):
    """Unit-scale working variance for an IPW-analyzed observational study.

    ``beta`` is a BetaOverlap describing the propensity-score distribution;
    requires a > 1 and b > 1 for the inverse-propensity means to exist.
    """
    # import here: overlap depends on errors only, but formulas<->overlap
    # would otherwise cycle through the type check
    from .overlap import BetaOverlap, min_phi_for_finite_variance

    if not isinstance(beta, BetaOverlap):
        raise DomainError("beta must be a BetaOverlap")
    _check_rate("d1", d1)
    _check_rate("d0", d0)
    a, b = beta.a, beta.b
    if a <= 1.0 or b <= 1.0:
        from .errors import InfiniteVarianceError

        min_phi = min_phi_for_finite_variance(r)
        raise InfiniteVarianceError(
            "IPW variance is infinite: the Beta overlap model needs a > 1 and "
            f"b > 1 (got a={a:.6g}, b={b:.6g}); at r={r:.6g} this requires an "
            f"overlap coefficient above {min_phi:.4f}",
            min_phi=min_phi,
        )
    lam1, lam0 = lambda_pair(r, tau0)
    d = r * d1 + (1.0 - r) * d0
    value = ((lam1 + lam0) / d) ** 2 * (
        r**2 * lam0**2 * d1 * (a + b - 1.0) / (a - 1.0)
        + (1.0 - r) ** 2 * lam1**2 * d0 * (a + b - 1.0) / (b - 1.0)
    )
    return Variance(value, UNITS)


def v_hsieh_lavori(r, beta):
    """Event-scale comparator: Schoenfeld inflated by 1/(1-R^2), R^2 = 1/(a+b+1)."""
    base = v_schoenfeld(r).value
    return Variance(base * (1.0 + 1.0 / (beta.a + beta.b)), EVENTS)


def _alpha_prime(alpha, sides):
    _check_open_unit("alpha", alpha)
    if sides == 1:
        return alpha
    if sides == 2:
        return alpha / 2.0
    raise DomainError("sides must be 1 or 2")


def sample_size_raw(variance, tau0, alpha, power, sides=1):
    """Pre-ceiling sample size (z_{1-a'} + z_power)^2 * V / tau0^2, unit scale."""
    if isinstance(variance, Variance):
        if variance.scale != UNITS:
            raise DomainError(
                "sample_size needs a unit-scale variance; convert with to_units(d)"
            )
        v = variance.value
    else:
        v = float(variance)
    if v <= 0.0 or not math.isfinite(v):
        raise DomainError(f"variance must be positive and finite, got {v!r}")
    if tau0 == 0.0:
        raise DomainError("tau0 must be nonzero for a sample-size calculation")
    _check_open_unit("power", power)
    a = _alpha_prime(alpha, sides)
    zsum = ndtri(1.0 - a) + ndtri(power)
    return float(zsum**2 * v / tau0**2)


def ceil_n(raw):
    """Final integer sample size; ceiling applied once, with an ulp guard."""
    return int(math.ceil(raw * (1.0 - _CEIL_FUZZ)))


def sample_size(variance, tau0, alpha, power, sides=1):
    """Minimal number of units for the one-sided (or two-sided) Wald test."""
    return ceil_n(sample_size_raw(variance, tau0, alpha, power, sides))


def power_at_n(variance, tau0, alpha, n, sides=1):
    """Power of the level-alpha Wald test with n units: Phi(sqrt(n*tau0^2/V) - z)."""
    if isinstance(variance, Variance):
        if variance.scale != UNITS:
            raise DomainError(
                "power_at_n needs a unit-scale variance; convert with to_units(d)"
            )
        v = variance.value
    else:
        v = float(variance)
    if v <= 0.0 or not math.isfinite(v):
        raise DomainError(f"variance must be positive and finite, got {v!r}")
    if tau0 == 0.0:
        raise DomainError("tau0 must be nonzero for a power calculation")
    if n < 0:
        raise DomainError("n must be nonnegative")
    a = _alpha_prime(alpha, sides)
    return float(ndtr(math.sqrt(n * tau0**2 / v) - ndtri(1.0 - a)))


THRESHOLD = "threshold"
TRIVIAL = "trivially-conservative"
NOT_APPLICABLE = "not-applicable"

# below this the threshold rounds to a 0% control survival: any study with
# nonzero end-of-follow-up survival satisfies it
_TRIVIAL_GAMMA = 0.005


@dataclass(frozen=True)
class GammaThreshold:
    """Minimal end-of-follow-up control survival for guaranteed conservativeness.

    ``status`` is "threshold" when the sufficient sign condition holds and the
    bound bites, "trivially-conservative" when the bound rounds to zero, and
    "not-applicable" (value None) outside the sign condition.
    """

    status: str
    value: float | None


def conservativeness_gamma(r, tau0):
    """Sufficient control-survival threshold under equal censoring across arms.

    gamma_min = ((1-r)/(r*exp(tau0)))^(2/(exp(tau0)-1)), valid for r < 1/2 with
    tau0 < 0; the symmetric case r > 1/2 with tau0 > 0 is handled by relabeling
    arms (the threshold then applies to the relabeled control arm). r = 1/2
    works for either sign. Outside those sign conditions the bound is not
    established and a not-applicable marker is returned.
    """
    _check_open_unit("r", r)
    if tau0 == 0.0 or not math.isfinite(tau0):
        raise DomainError("tau0 must be nonzero and finite")
    if tau0 < 0.0 and r <= 0.5:
        rr, tt = r, tau0
    elif tau0 > 0.0 and r >= 0.5:
        rr, tt = 1.0 - r, -tau0
    else:
        return GammaThreshold(NOT_APPLICABLE, None)
    gamma = ((1.0 - rr) / (rr * math.exp(tt))) ** (2.0 / (math.exp(tt) - 1.0))
    status = TRIVIAL if gamma < _TRIVIAL_GAMMA else THRESHOLD
    return GammaThreshold(status, gamma)
