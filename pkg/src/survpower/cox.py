"""Estimation machinery: weighted Cox fitting with robust variance,
logistic propensity estimation, Kaplan-Meier, and the Wald test.

The Cox model here has the binary treatment as its only covariate, fitted by
the weighted partial-likelihood score

    U(tau) = sum_i w_i d_i [Z_i - S1(tau, T_i)/S0(tau, T_i)],

with S_k(tau, t) = sum_j w_j 1{T_j >= t} exp(tau Z_j) Z_j^k and Breslow
handling of ties (all units with T_j >= t, censored or not, belong to the risk
set at t; tied events share one risk set). The robust variance is the
sandwich B/A^2 built from empirical influence residuals that carry both the
event term and the cumulative-hazard integral term.

Weights rescaled by a single global constant leave the fit unchanged (the
score is homogeneous); per-arm constants do not cancel exactly in finite
samples, although under exact proportional hazards the large-sample fit is
insensitive to them.
"""

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import expit, ndtr, ndtri

from .errors import (
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    RankDeficiencyError,
    SeparationError,
)

_SCORE_TOL = 1e-10
_MAX_ITER = 50
_DIVERGENCE = 20.0
# step-collapse fallback: on very large datasets cumulative-sum roundoff can
# floor the achievable |score| near 1e-11, below which Newton steps vanish
_PLATEAU_SCORE = 1e-6


class SubjectRecord(NamedTuple):
    """One observed unit: (time, event indicator, treatment, covariates, weight)."""

    time: float
    event: int
    z: int
    x: tuple = ()
    weight: float = 1.0


class SurvivalData:
    """Column-array view of a dataset of SubjectRecords."""

    def __init__(self, time, event, z, x=None, weight=None):
        self.time = np.asarray(time, dtype=float)
        self.event = np.asarray(event, dtype=np.int8)
        self.z = np.asarray(z, dtype=np.int8)
        n = self.time.shape[0]
        if x is None:
            x = np.empty((n, 0))
        self.x = np.asarray(x, dtype=float)
        if self.x.ndim == 1:
            self.x = self.x.reshape(n, -1)
        self.weight = (
            np.ones(n) if weight is None else np.asarray(weight, dtype=float)
        )
        self._validate()

    def _validate(self):
        n = self.time.shape[0]
        if n == 0:
            raise DegenerateDataError("dataset is empty")
        for name, arr in (
            ("event", self.event),
            ("z", self.z),
            ("weight", self.weight),
        ):
            if arr.shape[0] != n:
                raise DomainError(f"{name} length does not match time")
        if self.x.shape[0] != n:
            raise DomainError("covariate rows do not match time")
        if np.any(self.time < 0) or not np.all(np.isfinite(self.time)):
            raise DomainError("times must be finite and nonnegative")
        if not np.all((self.event == 0) | (self.event == 1)):
            raise DomainError("event indicators must be 0 or 1")
        if not np.all((self.z == 0) | (self.z == 1)):
            raise DomainError("treatment indicators must be 0 or 1")
        if np.any(self.weight < 0) or not np.all(np.isfinite(self.weight)):
            raise DomainError("weights must be finite and nonnegative")

    def __len__(self):
        return self.time.shape[0]

    @classmethod
    def from_records(cls, records):
        records = list(records)
        if not records:
            raise DegenerateDataError("no records")
        dims = {len(rec.x) for rec in records}
        if len(dims) > 1:
            raise DomainError("covariate dimension must be uniform across records")
        return cls(
            time=[rec.time for rec in records],
            event=[rec.event for rec in records],
            z=[rec.z for rec in records],
            x=np.array([rec.x for rec in records], dtype=float).reshape(len(records), -1),
            weight=[rec.weight for rec in records],
        )

    def with_weight(self, weight):
        return SurvivalData(self.time, self.event, self.z, self.x, weight)


def read_subjects_csv(path):
    """Load SubjectRecords from CSV.

    Header required; columns ``time``, ``event``, ``z``, then any number of
    covariates ``x1..xp`` (in order), and an optional ``weight`` column.
    UTF-8, '.' decimal separator.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DomainError(f"{path}: missing header row")
        fields = [f.strip() for f in reader.fieldnames]
        for required in ("time", "event", "z"):
            if required not in fields:
                raise DomainError(f"{path}: missing required column {required!r}")
        xcols = []
        k = 1
        while f"x{k}" in fields:
            xcols.append(f"x{k}")
            k += 1
        has_weight = "weight" in fields
        time, event, z, x, weight = [], [], [], [], []
        for row in reader:
            time.append(float(row["time"]))
            event.append(int(float(row["event"])))
            z.append(int(float(row["z"])))
            x.append([float(row[c]) for c in xcols])
            weight.append(float(row["weight"]) if has_weight else 1.0)
    return SurvivalData(time, event, z, np.array(x).reshape(len(time), -1), weight)


@dataclass(frozen=True)
class CoxFit:
    """Fitted log marginal hazard ratio with sandwich and model-based errors."""

    tau_hat: float
    robust_se: float
    naive_se: float
    iterations: int
    converged: bool
    score: float


class _RiskSets:
    """Time-sorted arrays with per-event risk-set lookups."""

    def __init__(self, data: SurvivalData):
        order = np.argsort(data.time, kind="stable")
        self.t = data.time[order]
        self.z = data.z[order].astype(float)
        self.w = data.weight[order]
        self.d = data.event[order].astype(bool)
        # first index of each tie group: risk set at an event time starts here
        self.group = np.searchsorted(self.t, self.t, side="left")
        self.ev_group = self.group[self.d]
        self.w_ev = self.w[self.d]
        self.z_ev = self.z[self.d]

    def sums(self, tau):
        """Reverse-cumulative risk sums S0, S1 evaluated at each position."""
        wexp = self.w * np.exp(tau * self.z)
        s0 = np.cumsum(wexp[::-1])[::-1]
        s1 = np.cumsum((wexp * self.z)[::-1])[::-1]
        return s0, s1

    def score_info(self, tau):
        s0, s1 = self.sums(tau)
        p = s1[self.ev_group] / s0[self.ev_group]
        score = float(np.sum(self.w_ev * (self.z_ev - p)))
        info = float(np.sum(self.w_ev * p * (1.0 - p)))
        return score, info


def _check_fittable(data: SurvivalData):
    d = data.event.astype(bool)
    if not d.any():
        raise DegenerateDataError("no events in the dataset")
    if not (data.z == 1).any() or not (data.z == 0).any():
        raise DegenerateDataError("both treatment arms must be present")
    if not d[data.z == 1].any() or not d[data.z == 0].any():
        raise DegenerateDataError("each arm must contribute at least one event")
    if not (data.weight > 0).any():
        raise DegenerateDataError("weights are all zero")


def fit_weighted_cox(data, tol=_SCORE_TOL, max_iter=_MAX_ITER):
    """Newton solve of the weighted partial-likelihood score for binary treatment.

    Starts at tau = 0 with step-halving whenever a full step fails to shrink
    |score|; |tau| > 20 is flagged as monotone likelihood (separation). The
    information term is the weighted risk-set variance of Z and is positive
    whenever both arms remain at risk, making the solution unique.
    """
    if isinstance(data, (list, tuple)):
        data = SurvivalData.from_records(data)
    _check_fittable(data)
    rs = _RiskSets(data)

    tau = 0.0
    score, info = rs.score_info(tau)
    iterations = 0
    converged = abs(score) <= tol
    while not converged and iterations < max_iter:
        if info <= 0.0:
            raise ConvergenceError("information is not positive; cannot iterate")
        step = score / info
        new_tau = tau + step
        new_score, new_info = rs.score_info(new_tau)
        halvings = 0
        while abs(new_score) > abs(score) and halvings < 40:
            step *= 0.5
            new_tau = tau + step
            new_score, new_info = rs.score_info(new_tau)
            halvings += 1
        if abs(new_tau) > _DIVERGENCE:
            raise SeparationError(
                "tau diverged past +/-20: monotone likelihood (no overlap in "
                "event risk between arms)"
            )
        collapsed = abs(new_tau - tau) < 1e-15 * (1.0 + abs(tau))
        tau, score, info = new_tau, new_score, new_info
        iterations += 1
        if abs(score) <= tol:
            converged = True
        elif collapsed and abs(score) < _PLATEAU_SCORE:
            converged = True
    if not converged:
        raise ConvergenceError(
            f"Newton failed to converge in {max_iter} iterations (|score|={abs(score):.3g})"
        )
    robust = robust_variance(data, tau)
    naive_se = 1.0 / math.sqrt(info) if info > 0 else float("nan")
    return CoxFit(
        tau_hat=tau,
        robust_se=math.sqrt(robust),
        naive_se=naive_se,
        iterations=iterations,
        converged=converged,
        score=score,
    )


def robust_variance(data, tau_hat):
    """Sandwich variance of tau_hat: B/A^2 from empirical influence residuals.

    A = sum_i w_i d_i [S2/S0 - (S1/S0)^2](T_i)  (S2 = S1 for binary Z), and
    B = sum_i eta_i^2 with

        eta_i = w_i d_i [Z_i - p(T_i)]
                - w_i exp(tau Z_i) sum_{event times t <= T_i} [Z_i - p(t)] dL(t),

    where p = S1/S0 and dL is the Breslow baseline-hazard increment
    (sum of event weights at t) / S0(t). With unit weights this is exactly the
    classical robust variance for the unweighted Cox model.
    """
    if isinstance(data, (list, tuple)):
        data = SurvivalData.from_records(data)
    _check_fittable(data)
    rs = _RiskSets(data)
    s0, s1 = rs.sums(tau_hat)
    p_all = s1 / s0

    a = float(np.sum(rs.w_ev * p_all[rs.ev_group] * (1.0 - p_all[rs.ev_group])))
    if a <= 0.0:
        raise DomainError("singular information: cannot form the sandwich")

    # Breslow increments on the unique event-time grid
    ev_times = rs.t[rs.d]
    uniq_times, uniq_start = np.unique(ev_times, return_index=True)
    grp = np.searchsorted(uniq_times, ev_times)
    wd = np.zeros(len(uniq_times))
    np.add.at(wd, grp, rs.w_ev)
    s0_u = s0[rs.ev_group[uniq_start]]
    p_u = p_all[rs.ev_group[uniq_start]]
    dl = wd / s0_u
    cum0 = np.cumsum(dl)
    cum1 = np.cumsum(p_u * dl)

    k = np.searchsorted(uniq_times, rs.t, side="right") - 1
    l0 = np.where(k >= 0, cum0[np.maximum(k, 0)], 0.0)
    l1 = np.where(k >= 0, cum1[np.maximum(k, 0)], 0.0)

    event_term = np.zeros(len(rs.t))
    event_term[rs.d] = rs.w_ev * (rs.z_ev - p_all[rs.ev_group])
    integral_term = rs.w * np.exp(tau_hat * rs.z) * (rs.z * l0 - l1)
    eta = event_term - integral_term
    b = float(np.sum(eta**2))
    return b / a**2


@dataclass(frozen=True)
class LogisticFit:
    """Logistic propensity model fit: coefficients (intercept first) and fitted e."""

    coef: np.ndarray
    fitted: np.ndarray
    iterations: int


def fit_logistic_ps(x, z, tol=1e-8, max_iter=100):
    """Maximum-likelihood logistic regression of treatment on covariates.

    Newton (IRLS) to gradient L2-norm below tol. Raises SeparationError when
    the linear score perfectly separates the classes, RankDeficiencyError for
    a singular design.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    design = np.column_stack([np.ones(n), x])
    if not ((z == 1).any() and (z == 0).any()):
        raise DegenerateDataError("both classes must be present")
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise RankDeficiencyError("design matrix is rank deficient")

    beta = np.zeros(design.shape[1])
    for it in range(1, max_iter + 1):
        eta = design @ beta
        p = expit(eta)
        grad = design.T @ (z - p)
        if np.linalg.norm(grad) < tol:
            # the gradient also vanishes along a separating direction, where
            # the MLE sits at infinity; pinned probabilities reveal it
            if np.abs(eta).max() > 15.0 and _is_separated(eta, z):
                raise SeparationError(
                    "propensity model separates the arms perfectly"
                )
            return LogisticFit(coef=beta, fitted=p, iterations=it)
        wdiag = np.maximum(p * (1.0 - p), 1e-12)
        hess = design.T @ (design * wdiag[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            _raise_logistic_failure(eta, z)
        beta = beta + step
        if np.abs(design @ beta).max() > 300.0:
            _raise_logistic_failure(design @ beta, z)
    _raise_logistic_failure(design @ beta, z)


def _is_separated(eta, z):
    treated = eta[z == 1]
    control = eta[z == 0]
    return treated.min() >= control.max() or control.min() >= treated.max()


def _raise_logistic_failure(eta, z):
    if _is_separated(eta, z):
        raise SeparationError("propensity model separates the arms perfectly")
    raise ConvergenceError("logistic fit failed to converge")


def kaplan_meier(time, event, at_time):
    """Product-limit survival estimate at ``at_time`` (right-continuous steps)."""
    time = np.asarray(time, dtype=float)
    event = np.asarray(event, dtype=bool)
    if time.size == 0:
        raise DegenerateDataError("no records")
    ev_times = np.unique(time[event & (time <= at_time)])
    surv = 1.0
    for t in ev_times:
        n_at_risk = np.sum(time >= t)
        d_t = np.sum(event & (time == t))
        surv *= 1.0 - d_t / n_at_risk
    return float(surv)


@dataclass(frozen=True)
class WaldResult:
    z: float
    p_value: float
    reject: bool


def wald_test(tau_hat, se, null_tau=0.0, alpha=0.05, sides=1, direction=-1):
    """Wald test of tau = null_tau.

    One-sided by default in the protective direction (direction = -1 rejects
    for small tau_hat, matching postulated hazard ratios below 1); pass
    direction = +1 for the harmful direction or sides = 2 for two-sided.
    """
    if not (se > 0.0) or not math.isfinite(se):
        raise DomainError(f"se must be positive and finite, got {se!r}")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    stat = (tau_hat - null_tau) / se
    if sides == 2:
        p = 2.0 * float(ndtr(-abs(stat)))
    elif sides == 1:
        p = float(ndtr(stat)) if direction < 0 else float(ndtr(-stat))
    else:
        raise DomainError("sides must be 1 or 2")
    return WaldResult(z=stat, p_value=p, reject=p <= alpha)


def z_quantile(c):
    """Standard-normal quantile (re-exported convenience)."""
    return float(ndtri(c))
