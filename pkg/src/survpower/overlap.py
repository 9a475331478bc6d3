"""Beta model of the propensity-score distribution and the overlap calculus.

The pair (a, b) of Beta shape parameters is in bijection with the design
inputs (r, phi): r = a/(a+b) is the treatment proportion and phi is the
Bhattacharyya overlap coefficient between the arm-conditional propensity
densities,

    phi = [Gamma(a+1/2) / (sqrt(a) Gamma(a))] * [Gamma(b+1/2) / (sqrt(b) Gamma(b))],

monotonically increasing in both shapes. Everything the design formulas need
from the propensity distribution is a rational function of (a, b).
"""

import math
from dataclasses import dataclass

from scipy.special import gammaln

from .errors import ConvergenceError, DomainError, ExistenceError

_BISECT_TOL = 1e-12
_PHI_CHECK_TOL = 1e-10


def _log_gamma_half_ratio(a):
    """ln[Gamma(a+1/2) / (sqrt(a) Gamma(a))], the per-shape log-overlap term.

    Plain gammaln differences cancel catastrophically for large shapes (the
    term is ~ -1/(8a) while each gammaln is ~ a ln a), so beyond a = 30 the
    difference is taken inside a Stirling expansion; both branches are
    accurate to ~3e-15 absolute.
    """
    if a < 30.0:
        return float(gammaln(a + 0.5) - gammaln(a)) - 0.5 * math.log(a)
    t = a * math.log1p(0.5 / a) - 0.5
    t += 1.0 / (12.0 * (a + 0.5)) - 1.0 / (12.0 * a)
    t -= 1.0 / (360.0 * (a + 0.5) ** 3) - 1.0 / (360.0 * a**3)
    t += 1.0 / (1260.0 * (a + 0.5) ** 5) - 1.0 / (1260.0 * a**5)
    return t


def phi_from_ab(a, b):
    """Overlap coefficient of Beta(a, b), evaluated in log space.

    Raw Gamma overflows near a ~ 170; the log-space product stays inside
    (0, 1) for shapes up to 1e12.
    """
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"Beta shapes must be positive, got a={a!r}, b={b!r}")
    return float(math.exp(_log_gamma_half_ratio(a) + _log_gamma_half_ratio(b)))


@dataclass(frozen=True)
class BetaOverlap:
    """Beta(a, b) propensity model with its implied (r, phi)."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0.0 and self.b > 0.0):
            raise DomainError(
                f"Beta shapes must be positive, got a={self.a!r}, b={self.b!r}"
            )

    @property
    def r(self):
        return self.a / (self.a + self.b)

    @property
    def phi(self):
        return phi_from_ab(self.a, self.b)

    @classmethod
    def from_r_phi(cls, r, phi):
        return solve_ab(r, phi)


def solve_ab(r, phi, tol=_BISECT_TOL, max_doublings=200):
    """Invert (r, phi) -> Beta(a, b) by bisection on a.

    With b = a(1-r)/r fixed by the treatment proportion, phi is monotonically
    increasing in a, so the root is bracketed by doubling the upper end and
    then bisected to ``tol`` (absolute and relative) in a. phi = 1 is rejected:
    it corresponds to a -> infinity, the randomized-trial limit.
    """
    if not (0.0 < r < 1.0):
        raise DomainError(f"r must lie in (0, 1), got {r!r}")
    if not (0.0 < phi < 1.0):
        raise DomainError(
            f"phi must lie strictly inside (0, 1), got {phi!r}; phi = 1 is the "
            "randomized-trial limit (a, b -> infinity)"
        )
    ratio = (1.0 - r) / r

    def f(a):
        return phi_from_ab(a, a * ratio) - phi

    lo, hi = 1e-12, 2.0
    n = 0
    while f(hi) < 0.0:
        lo, hi = hi, hi * 2.0
        n += 1
        if n > max_doublings:
            raise ConvergenceError(
                f"could not bracket a for (r={r}, phi={phi}) after "
                f"{max_doublings} doublings"
            )
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, lo):
            break
    a = 0.5 * (lo + hi)
    b = a * ratio
    if abs(phi_from_ab(a, b) - phi) > _PHI_CHECK_TOL:
        raise ConvergenceError(
            f"bisection failed to reach phi={phi} at r={r} "
            f"(got {phi_from_ab(a, b)})"
        )
    return BetaOverlap(a, b)


def min_phi_for_finite_variance(r):
    """Overlap threshold below which the IPW variance is infinite.

    Along the line b = a(1-r)/r, the region {a > 1, b > 1} is exited where
    min(a, b) = 1; the phi there is the infimum of feasible overlap.
    """
    if not (0.0 < r < 1.0):
        raise DomainError(f"r must lie in (0, 1), got {r!r}")
    if r <= 0.5:
        return phi_from_ab(1.0, (1.0 - r) / r)
    return phi_from_ab(r / (1.0 - r), 1.0)


class BetaMoments:
    """Propensity-model moments used by the variance formulas.

    Each moment raises ExistenceError when its Beta-shape condition fails:
    the inverse-propensity means need a > 1 (resp. b > 1), the IPW weight
    variances need a > 2 (resp. b > 2). r is taken from the Beta model.
    """

    def __init__(self, beta: BetaOverlap):
        self.beta = beta

    def _require(self, shape_name, value, floor, what):
        if value <= floor:
            raise ExistenceError(
                f"{what} requires {shape_name} > {floor:g}; got "
                f"{shape_name} = {value:.6g}"
            )

    @property
    def mean_inv_e(self):
        """E[1/e] = (a+b-1)/(a-1)."""
        a, b = self.beta.a, self.beta.b
        self._require("a", a, 1.0, "E[1/e]")
        return (a + b - 1.0) / (a - 1.0)

    @property
    def mean_inv_1me(self):
        """E[1/(1-e)] = (a+b-1)/(b-1)."""
        a, b = self.beta.a, self.beta.b
        self._require("b", b, 1.0, "E[1/(1-e)]")
        return (a + b - 1.0) / (b - 1.0)

    @property
    def var_w1(self):
        """Var[r/e] = r^2 b (a+b-1) / [(a-1)^2 (a-2)]."""
        a, b = self.beta.a, self.beta.b
        self._require("a", a, 2.0, "Var of the treated IPW weight")
        r = self.beta.r
        return r**2 * b * (a + b - 1.0) / ((a - 1.0) ** 2 * (a - 2.0))

    @property
    def var_w0(self):
        """Var[(1-r)/(1-e)] = (1-r)^2 a (a+b-1) / [(b-1)^2 (b-2)]."""
        a, b = self.beta.a, self.beta.b
        self._require("b", b, 2.0, "Var of the control IPW weight")
        r = self.beta.r
        return (1.0 - r) ** 2 * a * (a + b - 1.0) / ((b - 1.0) ** 2 * (b - 2.0))

    @property
    def r_squared(self):
        """Approximate R^2 of treatment on covariates: Var[e]/Var[Z] = 1/(a+b+1)."""
        return 1.0 / (self.beta.a + self.beta.b + 1.0)


def beta_moments(beta: BetaOverlap) -> BetaMoments:
    return BetaMoments(beta)


VERY_POOR = "very poor"
POOR = "poor"
MODERATE = "moderate"
GOOD = "good"


def overlap_category(phi):
    """Rule-of-thumb label: <0.8 very poor, [0.8,0.9) poor, [0.9,0.95) moderate, >=0.95 good."""
    if not (0.0 < phi <= 1.0):
        raise DomainError(f"phi must lie in (0, 1], got {phi!r}")
    if phi < 0.8:
        return VERY_POOR
    if phi < 0.9:
        return POOR
    if phi < 0.95:
        return MODERATE
    return GOOD
