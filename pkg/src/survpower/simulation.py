"""Synthetic superpopulation generator, calibration solvers, and the
empirical-power harness that verifies the design formulas end to end.

The generative protocol: three standard normals with pairwise correlation 0.5
plus three Bernoulli(0.5) covariates; a logistic propensity model
e(X) = expit(beta0 + c X'beta) whose scale c controls overlap; potential event
times from a Weibull proportional-hazards model with conditional hazard
(k/s)(t/s)^(k-1) exp(alpha z + X'theta), drawn by inverse transform with one
standard-exponential deviate per unit (shared across arms, so T(1) =
T(0) exp(-alpha/k)); arm-specific exponential random censoring; and an
administrative cutoff t_dagger at the 80th percentile of control potential
times. Calibration solvers pin (c, beta0) to a target (r, phi), the treatment
coefficient alpha to a target marginal log hazard ratio, and the censoring
rates nu_z to target shares, all by monotone bisection on fixed underlying
draws so every step is seed-deterministic.

Replicates are independently seeded through numpy SeedSequence spawning, so a
run is reproducible from (config, seed) alone and replicate order never
matters. Propensity scores are re-estimated per replicate in observational
mode, as a practitioner would.
"""

import math
import time as _time
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit, logit, ndtri

from . import design_effect as de
from . import formulas
from .cox import SurvivalData, fit_logistic_ps, fit_weighted_cox
from .errors import (
    CalibrationError,
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    SeparationError,
)
from .overlap import solve_ab

DEFAULT_BETA_PS = (0.2, 0.3, -0.3, -0.2, -0.3, 0.2)
DEFAULT_THETA = (-0.4, -0.2, 0.1, 0.1, 0.2, -0.3)

PHI_BINS = 200
PHI_TOL = 3e-3
ALPHA_TOL = 1e-4
CENSOR_TOL = 2e-3
_MIN_M = 10_000


@dataclass(frozen=True)
class SimConfig:
    """Concrete generation parameters for one superpopulation."""

    m: int = 100_000
    c: float = 0.0
    beta0: float = 0.0
    alpha_trt: float = 0.0
    nu1: float = 0.0
    nu0: float = 0.0
    t_dagger: float | None = None
    seed: int = 0
    beta_ps: tuple = DEFAULT_BETA_PS
    theta: tuple = DEFAULT_THETA
    weibull_k: float = 1.2
    weibull_s: float = 3.0

    def __post_init__(self):
        if self.m < _MIN_M:
            raise DomainError(f"m must be at least {_MIN_M}, got {self.m}")
        if self.weibull_k <= 0 or self.weibull_s <= 0:
            raise DomainError("Weibull shape and scale must be positive")
        if len(self.beta_ps) != 6 or len(self.theta) != 6:
            raise DomainError("coefficient vectors must have length 6")
        if self.nu1 < 0 or self.nu0 < 0:
            raise DomainError("censoring rates must be nonnegative")


class _Draws:
    """All random draws for one superpopulation, in a fixed stream order."""

    # equicorrelation 0.5 for the three normal covariates
    _CHOL = np.linalg.cholesky(np.array([
        [1.0, 0.5, 0.5],
        [0.5, 1.0, 0.5],
        [0.5, 0.5, 1.0],
    ]))

    def __init__(self, m, seed_seq):
        rng = np.random.Generator(np.random.PCG64(seed_seq))
        self.normals = rng.standard_normal((m, 3)) @ self._CHOL.T
        self.bernoulli = (rng.random((m, 3)) < 0.5).astype(float)
        self.u_z = rng.random(m)
        self.exp_dev = rng.standard_exponential(m)
        self.u_cens = rng.random(m)

    @property
    def x(self):
        return np.column_stack([self.normals, self.bernoulli])


def _streams(seed):
    """Child seed sequences: (population draws, design-effect MC, replicates)."""
    return np.random.SeedSequence(seed).spawn(3)


class Superpopulation:
    """One generated superpopulation with potential and observed outcomes."""

    def __init__(self, config: SimConfig, draws: _Draws):
        self.config = config
        self.x = draws.x
        xlin = self.x @ np.asarray(config.beta_ps)
        self.ps = expit(config.beta0 + config.c * xlin)
        self.z = draws.u_z < self.ps
        xtheta = self.x @ np.asarray(config.theta)
        k, s = config.weibull_k, config.weibull_s
        self.t0 = s * (draws.exp_dev / np.exp(xtheta)) ** (1.0 / k)
        self.t1 = self.t0 * math.exp(-config.alpha_trt / k)
        self.tstar = np.where(self.z, self.t1, self.t0)
        self.censor_time = _censor_times(draws.u_cens, self.z, config.nu1, config.nu0)
        cutoff = np.inf if config.t_dagger is None else config.t_dagger
        horizon = np.minimum(self.censor_time, cutoff)
        self.t_obs = np.minimum(self.tstar, horizon)
        self.delta = self.tstar <= horizon

    @property
    def m(self):
        return self.x.shape[0]

    def event_rates(self):
        """Empirical arm-specific observed event rates (d1, d0)."""
        return float(self.delta[self.z].mean()), float(self.delta[~self.z].mean())


def _censor_times(u, z, nu1, nu0):
    out = np.full(u.shape, np.inf)
    for arm, nu in ((True, nu1), (False, nu0)):
        if nu > 0.0:
            mask = z == arm
            out[mask] = -np.log1p(-u[mask]) / nu
    return out


def generate_superpopulation(config: SimConfig) -> Superpopulation:
    """Generate a superpopulation from fully concrete parameters; seed-deterministic."""
    draws = _Draws(config.m, _streams(config.seed)[0])
    return Superpopulation(config, draws)


# ---------------------------------------------------------------------------
# calibration solvers
# ---------------------------------------------------------------------------


def _calibrate_beta0(xlin, c, target_r):
    """Intercept such that the mean propensity hits the treatment proportion.

    At large overlap scales the mean propensity is a near-step function of
    the intercept (saturated expits), so the attainable tolerance degrades
    from 1e-9 to the 1/m granularity.
    """
    span = 40.0 + c * float(np.abs(xlin).max())
    lo, hi = -span, span
    for _ in range(220):
        mid = 0.5 * (lo + hi)
        if float(expit(mid + c * xlin).mean()) < target_r:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * max(1.0, span):
            break
    beta0 = 0.5 * (lo + hi)
    tol = max(1e-9, 2.0 / xlin.shape[0])
    if abs(float(expit(beta0 + c * xlin).mean()) - target_r) > tol:
        raise CalibrationError(f"could not match mean propensity {target_r}")
    return beta0


def empirical_phi(ps, z, bins=PHI_BINS):
    """Bhattacharyya coefficient between arm-conditional propensity histograms.

    Fixed 200 equal-width bins on (0, 1); the bin width cancels, so the
    coefficient is the sum of sqrt(products of bin proportions).
    """
    p1, _ = np.histogram(ps[z], bins=bins, range=(0.0, 1.0))
    p0, _ = np.histogram(ps[~z], bins=bins, range=(0.0, 1.0))
    if p1.sum() == 0 or p0.sum() == 0:
        raise DegenerateDataError("an arm is empty")
    return float(np.sqrt((p1 / p1.sum()) * (p0 / p0.sum())).sum())


def calibrate_overlap(x, u_z, target_r, target_phi, beta_ps=DEFAULT_BETA_PS,
                      tol=PHI_TOL):
    """Find (c, beta0) so the realized population hits (r, phi).

    Nested monotone bisections: the inner solve pins beta0 to the treatment
    proportion at each candidate c, the outer drives the empirical overlap
    coefficient (decreasing in c) to the target.
    """
    xlin = x @ np.asarray(beta_ps)

    def eval_c(c):
        beta0 = _calibrate_beta0(xlin, c, target_r)
        ps = expit(beta0 + c * xlin)
        return empirical_phi(ps, u_z < ps), beta0

    if target_phi >= 1.0 or target_phi <= 0.0:
        raise DomainError(f"target_phi must lie in (0, 1), got {target_phi!r}")
    lo, hi = 0.0, 1.0
    phi_hi, beta0_hi = eval_c(hi)
    doublings = 0
    while phi_hi > target_phi:
        lo, hi = hi, hi * 2.0
        doublings += 1
        if doublings > 12:
            raise CalibrationError(
                f"overlap target phi={target_phi} not reachable (scale bracket "
                f"exhausted at c={hi})"
            )
        phi_hi, beta0_hi = eval_c(hi)
    if abs(phi_hi - target_phi) <= tol:
        return hi, beta0_hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        phi_mid, beta0_mid = eval_c(mid)
        if abs(phi_mid - target_phi) <= tol:
            return mid, beta0_mid
        if phi_mid > target_phi:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9:
            break
    raise CalibrationError(
        f"overlap bisection could not reach phi={target_phi} within {tol}"
    )


def calibrate_alpha(t0, z, weights, target_tau, weibull_k, t_dagger=None,
                    tol=ALPHA_TOL, bracket=(-5.0, 1.0)):
    """Treatment coefficient such that the weighted fit on factual times
    returns the target marginal log hazard ratio.

    Runs on the superpopulation before random censoring is applied. The
    administrative cutoff t_dagger, when given, is part of the fit: the
    estimand is the time-averaged hazard ratio over the study period
    [0, t_dagger], so the target must be hit on that window (the cutoff
    depends only on control potential times, so there is no circularity).
    The fitted tau is monotone increasing in alpha, so bisection applies.
    """
    horizon = np.inf if t_dagger is None else t_dagger

    def tau_of(alpha):
        tstar = np.where(z, t0 * math.exp(-alpha / weibull_k), t0)
        data = SurvivalData(
            np.minimum(tstar, horizon),
            (tstar <= horizon).astype(np.int8),
            z,
            weight=weights,
        )
        return fit_weighted_cox(data).tau_hat

    lo, hi = bracket
    f_lo, f_hi = tau_of(lo) - target_tau, tau_of(hi) - target_tau
    if f_lo > 0 or f_hi < 0:
        raise CalibrationError(
            f"alpha bracket {bracket} does not contain target tau {target_tau}"
        )
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        f_mid = tau_of(mid) - target_tau
        if abs(f_mid) <= tol:
            return mid
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    raise CalibrationError(f"alpha bisection failed to reach tau={target_tau}")


def calibrate_followup_and_censoring(t0, tstar, z, u_cens,
                                     control_survival_frac=0.2,
                                     censor_targets=(0.0, 0.0),
                                     tol=CENSOR_TOL):
    """End-of-follow-up at the control potential-time quantile, then per-arm
    exponential censoring rates tuned so that the realized share of units lost
    to random censoring (C below both T* and t_dagger) hits its target.
    """
    t_dagger = float(np.quantile(t0, 1.0 - control_survival_frac))
    nus = []
    for arm, target in ((True, censor_targets[0]), (False, censor_targets[1])):
        if not (0.0 <= target < 1.0):
            raise DomainError(f"censoring target must lie in [0, 1), got {target!r}")
        if target == 0.0:
            nus.append(0.0)
            continue
        mask = z == arm
        horizon = np.minimum(tstar[mask], t_dagger)
        u = u_cens[mask]

        def share(nu):
            return float((u < -np.expm1(-nu * horizon)).mean())

        lo, hi = 0.0, 1.0
        doublings = 0
        while share(hi) < target:
            lo, hi = hi, hi * 2.0
            doublings += 1
            if doublings > 60:
                raise CalibrationError(f"censoring target {target} not reachable")
        nu = hi
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            s_mid = share(mid)
            if abs(s_mid - target) <= tol:
                nu = mid
                break
            if s_mid < target:
                lo = mid
            else:
                hi = mid
            nu = 0.5 * (lo + hi)
        if abs(share(nu) - target) > tol:
            raise CalibrationError(
                f"censoring bisection missed target {target} (got {share(nu)})"
            )
        nus.append(nu)
    return t_dagger, (nus[0], nus[1])


# ---------------------------------------------------------------------------
# empirical power
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisSpec:
    """How each replicate is sampled, weighted, and tested."""

    mode: str = "rct"  # "rct" (stratified draws, unit weights) or "observational"
    scheme: str = "ipw"
    target_r: float = 0.5
    alpha: float = 0.05
    sides: int = 1
    direction: int = -1
    rejection: str = "empirical"  # "empirical" (mode A) or "robust" (mode B)
    seed: int = 0
    budget_seconds: float | None = None
    keep_taus: bool = False

    def __post_init__(self):
        if self.mode not in ("rct", "observational"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.rejection not in ("empirical", "robust"):
            raise DomainError(f"unknown rejection mode {self.rejection!r}")


@dataclass(frozen=True)
class PowerEstimate:
    n: int
    b_requested: int
    b_completed: int
    failures: int
    rejections: int
    power: float
    mc_half_width: float
    seed: int
    taus: np.ndarray | None = None


def _replicate_weights(sub_z, sub_x, scheme):
    fit = fit_logistic_ps(sub_x, sub_z.astype(float))
    e = fit.fitted
    if scheme == "ipw":
        r_hat = float(sub_z.mean())
        return np.where(sub_z, r_hat / e, (1.0 - r_hat) / (1.0 - e))
    if scheme == "overlap":
        return np.where(sub_z, 1.0 - e, e)
    if scheme == "treated":
        return np.where(sub_z, 1.0, e / (1.0 - e))
    raise DomainError(f"unknown scheme {scheme!r}")


def empirical_power(pop: Superpopulation, n, b, spec: AnalysisSpec) -> PowerEstimate:
    """Proportion of replicates in which the Wald test rejects the null.

    Each replicate resamples n units with replacement (stratified by arm in
    rct mode, unstratified in observational mode), re-estimates propensities
    and weights in observational mode, and fits the weighted Cox model. Mode
    "empirical" tests tau_hat against the cross-replicate standard deviation
    of tau_hat (the protocol default); mode "robust" uses each replicate's own
    sandwich standard error. Failed replicates (degenerate draws) are skipped
    and counted.
    """
    if n > pop.m:
        raise DomainError(f"n={n} exceeds the superpopulation size {pop.m}")
    if b < 2:
        raise DomainError("need at least 2 replicates")
    children = np.random.SeedSequence(spec.seed).spawn(b)
    z_pool = np.flatnonzero(pop.z)
    c_pool = np.flatnonzero(~pop.z)
    n1 = min(max(int(round(n * spec.target_r)), 1), n - 1)

    taus, ses = [], []
    failures = 0
    completed = 0
    started = _time.monotonic()
    for i in range(b):
        if (
            spec.budget_seconds is not None
            and completed >= 2
            and _time.monotonic() - started > spec.budget_seconds
        ):
            break
        rng = np.random.Generator(np.random.PCG64(children[i]))
        if spec.mode == "rct":
            idx = np.concatenate([
                z_pool[rng.integers(0, len(z_pool), n1)],
                c_pool[rng.integers(0, len(c_pool), n - n1)],
            ])
        else:
            idx = rng.integers(0, pop.m, n)
        sub_z = pop.z[idx]
        completed += 1
        try:
            if spec.mode == "observational":
                w = _replicate_weights(sub_z, pop.x[idx], spec.scheme)
            else:
                w = None
            data = SurvivalData(pop.t_obs[idx], pop.delta[idx].astype(np.int8),
                                sub_z.astype(np.int8), weight=w)
            fit = fit_weighted_cox(data)
        except (ConvergenceError, DegenerateDataError, SeparationError):
            failures += 1
            continue
        taus.append(fit.tau_hat)
        ses.append(fit.robust_se)

    taus = np.asarray(taus)
    ses = np.asarray(ses)
    if len(taus) < 2:
        raise DegenerateDataError("fewer than two successful replicates")
    zcrit = ndtri(1.0 - (spec.alpha if spec.sides == 1 else spec.alpha / 2.0))
    scale = taus.std(ddof=1) if spec.rejection == "empirical" else ses
    stats = taus / scale
    if spec.sides == 2:
        reject = np.abs(stats) > zcrit
    elif spec.direction < 0:
        reject = stats < -zcrit
    else:
        reject = stats > zcrit
    rejections = int(reject.sum())
    power = rejections / len(taus)
    return PowerEstimate(
        n=int(n),
        b_requested=int(b),
        b_completed=completed,
        failures=failures,
        rejections=rejections,
        power=power,
        mc_half_width=1.96 * math.sqrt(power * (1.0 - power) / len(taus)),
        seed=spec.seed,
        taus=taus if spec.keep_taus else None,
    )


# ---------------------------------------------------------------------------
# end-to-end scenario
# ---------------------------------------------------------------------------

FORMULAS = ("proposed", "schoenfeld", "freedman", "hsieh-lavori")


@dataclass(frozen=True)
class ScenarioSpec:
    """One empirical-power experiment: targets, design formula, and scale."""

    kind: str = "rct"  # "rct" or "observational"
    target_r: float = 0.5
    target_hr: float = 0.6
    target_phi: float | None = None
    scheme: str = "ipw"
    formula: str = "proposed"
    m: int = 100_000
    b: int = 1000
    alpha: float = 0.05
    power: float = 0.8
    sides: int = 1
    censor_treated: float = 0.0
    censor_control: float = 0.0
    control_survival: float = 0.2
    seed: int = 0
    rejection: str = "empirical"
    budget_seconds: float | None = None
    n_override: int | None = None
    kappa_draws: int = de.DEFAULT_DRAWS
    keep_taus: bool = False

    def __post_init__(self):
        if self.kind not in ("rct", "observational"):
            raise DomainError(f"unknown scenario kind {self.kind!r}")
        if self.formula not in FORMULAS:
            raise DomainError(f"unknown design formula {self.formula!r}")
        if self.kind == "observational" and self.target_phi is None:
            raise DomainError("observational scenarios need target_phi")
        if not (0.0 < self.target_hr) or self.target_hr == 1.0:
            raise DomainError("target_hr must be positive and not 1")
        if self.scheme not in ("ipw", "overlap", "treated"):
            raise DomainError(f"unknown scheme {self.scheme!r}")


def _true_weights(spec, ps, z):
    if spec.kind == "rct":
        return np.ones(len(ps))
    scheme = de.scheme_by_name(spec.scheme, spec.target_r)
    return np.where(z, scheme.w1(ps), scheme.w0(ps))


def _design_n(spec, tau0, d1, d0, kappa_seed):
    """Required N (and diagnostics) for the scenario's design formula."""
    r = spec.target_r
    d = r * d1 + (1.0 - r) * d0
    args = (tau0, spec.alpha, spec.power, spec.sides)
    kappa = None
    if spec.formula == "schoenfeld":
        v = formulas.v_schoenfeld(r).to_units(d)
    elif spec.formula == "freedman":
        v = formulas.v_freedman(r, tau0).to_units(d)
    elif spec.formula == "hsieh-lavori":
        beta = solve_ab(r, spec.target_phi)
        v = formulas.v_hsieh_lavori(r, beta).to_units(d)
    elif spec.kind == "rct" or spec.scheme == "ipw":
        if spec.kind == "rct":
            v = formulas.v_rct(r, tau0, d1, d0)
        else:
            v = formulas.v_obs(r, tau0, d1, d0, solve_ab(r, spec.target_phi))
    else:
        # general balancing weights: design-effect inflation over the RCT size
        scheme = de.scheme_by_name(spec.scheme, r)
        kappa = de.kappa_de_monte_carlo(
            r, spec.target_phi, scheme, n_draws=spec.kappa_draws, seed=kappa_seed
        )
        raw_rct = formulas.sample_size_raw(formulas.v_rct(r, tau0, d1, d0), *args)
        return de.sample_size_with_vif(raw_rct, kappa.value), None, kappa
    n = formulas.sample_size(v, *args)
    return n, v.value, kappa


def run_scenario(spec: ScenarioSpec) -> dict:
    """Calibrate a superpopulation to the scenario targets, size the study by
    the chosen formula, and measure empirical power. Returns a JSON-ready dict.
    """
    s_pop, s_kappa, s_power = _streams(spec.seed)
    draws = _Draws(spec.m, s_pop)
    x = draws.x
    tau0 = math.log(spec.target_hr)

    if spec.kind == "rct":
        c, beta0 = 0.0, float(logit(spec.target_r))
    else:
        c, beta0 = calibrate_overlap(x, draws.u_z, spec.target_r, spec.target_phi)

    base = SimConfig(m=spec.m, c=c, beta0=beta0, seed=spec.seed)
    ps = expit(beta0 + c * (x @ np.asarray(base.beta_ps)))
    z = draws.u_z < ps
    xtheta = x @ np.asarray(base.theta)
    t0 = base.weibull_s * (draws.exp_dev / np.exp(xtheta)) ** (1.0 / base.weibull_k)

    w_true = _true_weights(spec, ps, z)
    t_dagger_pre = float(np.quantile(t0, 1.0 - spec.control_survival))
    alpha_trt = calibrate_alpha(t0, z, w_true, tau0, base.weibull_k,
                                t_dagger=t_dagger_pre)
    tstar = np.where(z, t0 * math.exp(-alpha_trt / base.weibull_k), t0)

    t_dagger, (nu1, nu0) = calibrate_followup_and_censoring(
        t0, tstar, z, draws.u_cens,
        control_survival_frac=spec.control_survival,
        censor_targets=(spec.censor_treated, spec.censor_control),
    )
    config = replace(base, alpha_trt=alpha_trt, nu1=nu1, nu0=nu0,
                     t_dagger=t_dagger)
    pop = Superpopulation(config, draws)

    d1, d0 = pop.event_rates()
    kappa_seed = int(s_kappa.generate_state(1)[0])
    n, v_units, kappa = _design_n(spec, tau0, d1, d0, kappa_seed)
    if spec.n_override is not None:
        n = int(spec.n_override)

    analysis = AnalysisSpec(
        mode=spec.kind if spec.kind == "rct" else "observational",
        scheme=spec.scheme,
        target_r=spec.target_r,
        alpha=spec.alpha,
        sides=spec.sides,
        rejection=spec.rejection,
        seed=int(s_power.generate_state(1)[0]),
        budget_seconds=spec.budget_seconds,
        keep_taus=spec.keep_taus,
    )
    est = empirical_power(pop, n, spec.b, analysis)

    result = {
        "kind": spec.kind,
        "formula": spec.formula,
        "scheme": spec.scheme,
        "n": n,
        "variance_units": v_units,
        "power": est.power,
        "mc_half_width": est.mc_half_width,
        "rejections": est.rejections,
        "b_requested": est.b_requested,
        "b_completed": est.b_completed,
        "failures": est.failures,
        "d1": d1,
        "d0": d0,
        "calibration": {
            "c": c,
            "beta0": beta0,
            "alpha_trt": alpha_trt,
            "t_dagger": t_dagger,
            "nu1": nu1,
            "nu0": nu0,
        },
        "kappa": None if kappa is None else {
            "value": kappa.value,
            "mc_std_error": kappa.mc_std_error,
            "n_draws": kappa.n_draws,
            "seed": kappa.seed,
        },
        "seed": spec.seed,
    }
    if spec.keep_taus and est.taus is not None:
        result["taus"] = [float(t) for t in est.taus]
    return result
