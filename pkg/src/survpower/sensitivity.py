"""Closed-form bounds on the confounding residual of the working variance.

The observational working variance omits a signed residual driven by the
within-arm covariance between conditional survival and weight. Given
sup-correlation bounds rho_z (and optionally the control survival gamma at the
end of follow-up), the residual is bounded by four computable quantities; the
resulting interval on the variance translates into a sensitivity range
[n_low, n_high] around the working sample size.

rho_z must come from domain knowledge; the package default rho1 = rho0 = 0.5
with gamma absent is an artifact convention (a mid-scale slider position), not
a derived value.
"""

import math
from dataclasses import dataclass

from .errors import DomainError
from .formulas import DesignInputs, lambda_pair, sample_size, v_obs
from .overlap import BetaMoments, BetaOverlap, solve_ab


@dataclass(frozen=True)
class SensitivityInputs:
    """Sup-correlation bounds per arm, plus an optional end-of-follow-up survival."""

    rho1: float = 0.5
    rho0: float = 0.5
    gamma: float | None = None

    def __post_init__(self):
        for name, rho in (("rho1", self.rho1), ("rho0", self.rho0)):
            if not (0.0 <= rho <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {rho!r}")
        if self.gamma is not None and not (0.0 < self.gamma < 1.0):
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma!r}")


@dataclass(frozen=True)
class EpsilonBound:
    """Residual bounds and the induced sample-size sensitivity range."""

    m1: float
    m2: float | None
    m3: float | None
    m4: float | None
    bound: float
    n: int
    n_low: int
    n_high: int
    clamped: bool


def epsilon_bound(design: DesignInputs, beta: BetaOverlap, sens: SensitivityInputs):
    """Bound the residual and bracket the required sample size.

    M1 needs only the correlation bounds; M2-M4 additionally use gamma and
    tighten M1 when follow-up ends with substantial control survival. The
    operative bound is M1 without gamma, else min(M1..M4). Weight variances
    require a > 2 and b > 2.
    """
    moments = BetaMoments(beta)
    sd_w1 = math.sqrt(moments.var_w1)
    sd_w0 = math.sqrt(moments.var_w0)
    r, tau0, d = design.r, design.tau0, design.d
    lam1, lam0 = lambda_pair(r, tau0)
    lam_sq = (lam1 + lam0) ** 2
    b1 = sens.rho1 * r * lam0**2 * sd_w1
    b0 = sens.rho0 * (1.0 - r) * lam1**2 * sd_w0

    m1 = math.pi * lam_sq / (2.0 * d**2) * (b1 + b0)
    if sens.gamma is None:
        m2 = m3 = m4 = None
        bound = m1
    else:
        neg_log_g = -math.log(sens.gamma)
        m2 = lam_sq * neg_log_g / (2.0 * d**2) * (b1 * math.exp(tau0) + b0)
        half = b1 * math.exp(tau0 / 2.0) + b0
        m3 = lam_sq * math.sqrt(neg_log_g) / math.sqrt(d**3) * half
        m4 = lam_sq * math.sqrt(neg_log_g) / (math.sqrt(2.0) * d**2) * half
        bound = min(m1, m2, m3, m4)

    v = v_obs(r, tau0, design.d1, design.d0, beta).value
    n = sample_size(v, tau0, design.alpha, design.power, design.sides)
    n_high = sample_size(v + bound, tau0, design.alpha, design.power, design.sides)
    v_low = v - bound
    if v_low <= 0.0:
        n_low, clamped = 1, True
    else:
        n_low = sample_size(v_low, tau0, design.alpha, design.power, design.sides)
        clamped = False
    return EpsilonBound(
        m1=m1, m2=m2, m3=m3, m4=m4, bound=bound,
        n=n, n_low=n_low, n_high=n_high, clamped=clamped,
    )


def m1_values(design: DesignInputs, sens: SensitivityInputs, phis):
    """M1 along a sequence of overlap coefficients; vanishes as phi -> 1."""
    out = []
    for phi in phis:
        beta = solve_ab(design.r, phi)
        out.append(epsilon_bound(design, beta, sens).m1)
    return out
