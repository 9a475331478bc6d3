"""Residual bounds: dual-transcription oracle, monotonicities, range logic."""

import math

import pytest
from mpmath import mp, mpf

from survpower import (
    DesignInputs,
    DomainError,
    SensitivityInputs,
    epsilon_bound,
    m1_values,
    sample_size,
    v_obs,
)
from survpower.errors import ExistenceError
from survpower.overlap import BetaOverlap, solve_ab

LN06 = math.log(0.6)


def _design(**kwargs):
    base = dict(r=0.5, tau0=LN06, d1=0.8, d0=0.8, alpha=0.05, power=0.8, sides=1)
    base.update(kwargs)
    return DesignInputs(**base)


def _oracle_bounds(r, tau0, d1, d0, a, b, rho1, rho0, gamma):
    """Line-by-line re-transcription of the four bounds in 40-digit arithmetic."""
    mp.dps = 40
    r, tau0, d1, d0 = mpf(r), mpf(tau0), mpf(d1), mpf(d0)
    a, b, rho1, rho0 = mpf(a), mpf(b), mpf(rho1), mpf(rho0)
    lam1 = mp.sqrt(r / (1 - r)) * mp.exp(tau0 / 2)
    lam0 = 1 / lam1
    d = r * d1 + (1 - r) * d0
    var_w1 = r**2 * b * (a + b - 1) / ((a - 1) ** 2 * (a - 2))
    var_w0 = (1 - r) ** 2 * a * (a + b - 1) / ((b - 1) ** 2 * (b - 2))
    t1 = rho1 * r * lam0**2 * mp.sqrt(var_w1)
    t0 = rho0 * (1 - r) * lam1**2 * mp.sqrt(var_w0)
    lam_sq = (lam1 + lam0) ** 2
    m1 = mp.pi * lam_sq / (2 * d**2) * (t1 + t0)
    if gamma is None:
        return float(m1), None, None, None
    g = mpf(gamma)
    m2 = -lam_sq * mp.log(g) / (2 * d**2) * (t1 * mp.exp(tau0) + t0)
    m3 = lam_sq * mp.sqrt(-mp.log(g)) / mp.sqrt(d**3) * (t1 * mp.exp(tau0 / 2) + t0)
    m4 = lam_sq * mp.sqrt(-mp.log(g)) / (mp.sqrt(2) * d**2) * (
        t1 * mp.exp(tau0 / 2) + t0
    )
    return float(m1), float(m2), float(m3), float(m4)


class TestEpsilonBound:
    def test_zero_correlation_collapses(self):
        design = _design()
        beta = BetaOverlap(4.0, 4.0)
        eb = epsilon_bound(design, beta, SensitivityInputs(rho1=0.0, rho0=0.0))
        assert eb.m1 == 0.0
        assert eb.bound == 0.0
        assert eb.n_low == eb.n == eb.n_high

    def test_gamma_near_one_kills_tightened_bounds(self):
        design = _design()
        beta = BetaOverlap(4.0, 4.0)
        eb = epsilon_bound(design, beta, SensitivityInputs(gamma=1.0 - 1e-12))
        assert eb.m2 == pytest.approx(0.0, abs=1e-10)
        assert eb.m4 == pytest.approx(0.0, abs=1e-5)
        assert eb.bound == pytest.approx(0.0, abs=1e-5)

    def test_dual_transcription_oracle(self):
        design = _design()
        beta = BetaOverlap(4.0, 4.0)
        sens = SensitivityInputs(rho1=0.5, rho0=0.5, gamma=0.2)
        eb = epsilon_bound(design, beta, sens)
        m1, m2, m3, m4 = _oracle_bounds(0.5, LN06, 0.8, 0.8, 4, 4, 0.5, 0.5, 0.2)
        assert eb.m1 == pytest.approx(m1, rel=1e-13)
        assert eb.m2 == pytest.approx(m2, rel=1e-13)
        assert eb.m3 == pytest.approx(m3, rel=1e-13)
        assert eb.m4 == pytest.approx(m4, rel=1e-13)
        assert all(v > 0 and math.isfinite(v) for v in (eb.m1, eb.m2, eb.m3, eb.m4))

    def test_asymmetric_oracle(self):
        design = _design(r=0.35, d1=0.9, d0=0.65)
        beta = solve_ab(0.35, 0.93)
        sens = SensitivityInputs(rho1=0.8, rho0=0.3, gamma=0.35)
        eb = epsilon_bound(design, beta, sens)
        m = _oracle_bounds(0.35, LN06, 0.9, 0.65, beta.a, beta.b, 0.8, 0.3, 0.35)
        for got, want in zip((eb.m1, eb.m2, eb.m3, eb.m4), m):
            assert got == pytest.approx(want, rel=1e-12)

    def test_bound_never_exceeds_m1(self):
        design = _design()
        beta = BetaOverlap(4.0, 4.0)
        for gamma in (0.05, 0.2, 0.5, 0.9):
            eb = epsilon_bound(design, beta, SensitivityInputs(gamma=gamma))
            assert eb.bound <= eb.m1 + 1e-15

    def test_m1_gamma_invariant_others_monotone(self):
        design = _design()
        beta = BetaOverlap(4.0, 4.0)
        gammas = (0.6, 0.3, 0.1, 0.02)  # increasing |log gamma|
        bounds = [
            epsilon_bound(design, beta, SensitivityInputs(gamma=g)) for g in gammas
        ]
        m1s = {eb.m1 for eb in bounds}
        assert len(m1s) == 1
        for key in ("m2", "m3", "m4"):
            vals = [getattr(eb, key) for eb in bounds]
            assert all(y > x for x, y in zip(vals, vals[1:]))

    def test_joint_rho_homogeneity(self):
        design = _design(d1=0.7, d0=0.95)
        beta = solve_ab(design.r, 0.92)
        full = epsilon_bound(design, beta, SensitivityInputs(0.8, 0.6, gamma=0.25))
        half = epsilon_bound(design, beta, SensitivityInputs(0.4, 0.3, gamma=0.25))
        for key in ("m1", "m2", "m3", "m4"):
            assert getattr(half, key) == pytest.approx(
                0.5 * getattr(full, key), rel=1e-12
            )

    def test_single_arm_linearity(self):
        design = _design()
        beta = BetaOverlap(4.0, 4.0)
        one = epsilon_bound(design, beta, SensitivityInputs(rho1=1.0, rho0=0.0))
        half = epsilon_bound(design, beta, SensitivityInputs(rho1=0.5, rho0=0.0))
        assert half.m1 == pytest.approx(0.5 * one.m1, rel=1e-12)

    def test_range_brackets_n(self):
        design = _design()
        beta = solve_ab(0.5, 0.93)
        eb = epsilon_bound(design, beta, SensitivityInputs(0.5, 0.5, gamma=0.2))
        assert eb.n_low <= eb.n <= eb.n_high
        assert eb.n == sample_size(
            v_obs(0.5, LN06, 0.8, 0.8, beta), LN06, 0.05, 0.8
        )
        assert not eb.clamped

    def test_clamped_lower_end(self):
        # enormous rho at barely-existing weight variance swamps the variance
        design = _design()
        beta = BetaOverlap(2.05, 2.05)
        eb = epsilon_bound(design, beta, SensitivityInputs(rho1=1.0, rho0=1.0))
        assert eb.clamped
        assert eb.n_low == 1
        assert eb.n_high > eb.n

    def test_existence_gate(self):
        design = _design()
        with pytest.raises(ExistenceError):
            epsilon_bound(design, BetaOverlap(2.0, 4.0), SensitivityInputs())

    def test_gamma_domain(self):
        with pytest.raises(DomainError):
            SensitivityInputs(gamma=0.0)
        with pytest.raises(DomainError):
            SensitivityInputs(rho1=1.5)


class TestM1Curve:
    def test_strictly_decreasing_in_phi(self):
        design = _design(d1=1.0, d0=1.0)
        vals = m1_values(design, SensitivityInputs(rho1=1.0, rho0=1.0),
                         (0.90, 0.95, 0.99))
        assert all(y < x for x, y in zip(vals, vals[1:]))

    def test_practical_vanishing(self):
        # the decay factor depends only on sqrt(Var[w]) under the Beta model:
        # 0.0834 between phi 0.90 and 0.99 at r = 1/2 (regression value)
        design = _design(d1=1.0, d0=1.0)
        vals = m1_values(design, SensitivityInputs(rho1=1.0, rho0=1.0),
                         (0.90, 0.99))
        assert vals[1] / vals[0] == pytest.approx(0.08341552689044208, rel=1e-9)
        assert vals[1] < 0.1 * vals[0]
