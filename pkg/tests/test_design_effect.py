"""Kish design effect, Monte Carlo kappa, and its analytic IPW benchmarks."""

import math

import numpy as np
import pytest

from survpower import (
    DegenerateDataError,
    DomainError,
    kappa_de_monte_carlo,
    kappa_discrepancy,
    kappa_ipw_analytic,
    kish_design_effect,
    sample_size_with_vif,
    v_obs,
    v_rct,
    vif_analytic_ratio,
)
from survpower.design_effect import (
    custom_scheme,
    ipw_scheme,
    overlap_scheme,
    scheme_by_name,
    treated_scheme,
)
from survpower.errors import ExistenceError
from survpower.overlap import BetaOverlap, solve_ab

LN06 = math.log(0.6)


class TestKish:
    def test_constant_weights(self):
        assert kish_design_effect([1, 1, 0, 0], [2.0, 2.0, 5.0, 5.0]) == pytest.approx(
            1.0, rel=1e-14
        )

    def test_hand_example(self):
        assert kish_design_effect([1, 1, 0, 0], [1.0, 3.0, 1.0, 1.0]) == pytest.approx(
            1.125, rel=1e-14
        )

    def test_arm_rescaling_invariance(self):
        rng = np.random.Generator(np.random.PCG64(7))
        z = rng.integers(0, 2, 500)
        w = rng.uniform(0.5, 4.0, 500)
        base = kish_design_effect(z, w)
        scaled = np.where(z == 1, 7.3 * w, 0.11 * w)
        assert kish_design_effect(z, scaled) == pytest.approx(base, rel=1e-12)

    def test_at_least_one(self):
        rng = np.random.Generator(np.random.PCG64(11))
        for _ in range(20):
            z = rng.integers(0, 2, 80)
            if z.sum() in (0, 80):
                continue
            w = rng.gamma(2.0, 1.0, 80)
            assert kish_design_effect(z, w) >= 1.0 - 1e-12

    def test_degenerate_arms(self):
        with pytest.raises(DegenerateDataError):
            kish_design_effect([1, 1, 1], [1.0, 2.0, 3.0])
        with pytest.raises(DegenerateDataError):
            kish_design_effect([1, 0], [1.0, 0.0])

    def test_negative_weights_rejected(self):
        with pytest.raises(DomainError):
            kish_design_effect([1, 0], [1.0, -1.0])


class TestAnalyticKappa:
    def test_hand_value(self):
        assert kappa_ipw_analytic(0.5, 3, 3) == pytest.approx(1.25, rel=1e-14)

    def test_overlap_limit(self):
        assert kappa_ipw_analytic(0.3, 7e6, 7e6 * 7 / 3) == pytest.approx(1.0, abs=1e-5)

    def test_existence(self):
        with pytest.raises(ExistenceError):
            kappa_ipw_analytic(0.5, 1.0, 3.0)

    @pytest.mark.parametrize("tau", (-0.9, -0.2, 0.0, 0.5))
    @pytest.mark.parametrize("rates", ((1.0, 1.0), (0.8, 0.6), (0.4, 0.9)))
    def test_balanced_design_identity(self, tau, rates):
        d1, d0 = rates
        a, b = 4.2, 4.2
        assert vif_analytic_ratio(0.5, tau, d1, d0, a, b) == pytest.approx(
            kappa_ipw_analytic(0.5, a, b), rel=1e-12
        )

    @pytest.mark.parametrize("r", (0.2, 1 / 3, 0.5, 0.7))
    @pytest.mark.parametrize("ab", ((1.5, 2.5), (3.0, 3.0), (5.0, 11.0)))
    def test_vif_matches_variance_ratio(self, r, ab):
        a, b = ab
        tau, d1, d0 = LN06, 0.85, 0.7
        direct = (
            v_obs(r, tau, d1, d0, BetaOverlap(a, b)).value
            / v_rct(r, tau, d1, d0).value
        )
        assert vif_analytic_ratio(r, tau, d1, d0, a, b) == pytest.approx(
            direct, rel=1e-12
        )

    @pytest.mark.parametrize("ab", ((1.5, 2.5), (3.0, 3.0), (5.0, 11.0), (5.0, 10.0)))
    def test_discrepancy_is_subtraction(self, ab):
        # identity holds on the coherent manifold r = a/(a+b)
        a, b = ab
        r = a / (a + b)
        tau, d1, d0 = LN06, 0.85, 0.7
        gap = kappa_ipw_analytic(r, a, b) - vif_analytic_ratio(r, tau, d1, d0, a, b)
        assert kappa_discrepancy(r, tau, d1, d0, a, b) == pytest.approx(
            gap, rel=1e-10, abs=1e-12
        )

    def test_discrepancy_zeros(self):
        assert kappa_discrepancy(0.5, LN06, 0.8, 1.0, 5, 5) == 0.0
        # bracket vanishes when d0 e^tau = d1 e^-tau
        tau = 0.25
        d0 = 0.5
        d1 = d0 * math.exp(2 * tau)
        assert kappa_discrepancy(1 / 3, tau, d1, d0, 5, 10) == pytest.approx(
            0.0, abs=1e-15
        )

    def test_discrepancy_signed_value(self):
        got = kappa_discrepancy(1 / 3, LN06, 1.0, 1.0, 5.0, 10.0)
        want = kappa_ipw_analytic(1 / 3, 5.0, 10.0) - vif_analytic_ratio(
            1 / 3, LN06, 1.0, 1.0, 5.0, 10.0
        )
        assert got == pytest.approx(want, rel=1e-12)
        assert got != 0.0


class TestMonteCarloKappa:
    def test_matches_analytic_ipw(self):
        est = kappa_de_monte_carlo(0.5, 0.9, ipw_scheme(0.5), n_draws=10**6, seed=3)
        beta = solve_ab(0.5, 0.9)
        truth = kappa_ipw_analytic(0.5, beta.a, beta.b)
        assert abs(est.value - truth) < 3 * est.mc_std_error

    def test_constant_scheme_is_one(self):
        flat = custom_scheme(lambda e: np.ones_like(e), lambda e: np.ones_like(e))
        est = kappa_de_monte_carlo(0.5, 0.9, flat, n_draws=10**4, seed=1)
        assert est.value == pytest.approx(1.0, abs=1e-12)
        assert est.mc_std_error == pytest.approx(0.0, abs=1e-12)

    def test_overlap_scheme_tends_to_one(self):
        vals = [
            kappa_de_monte_carlo(0.5, phi, overlap_scheme(), n_draws=10**5, seed=5).value
            for phi in (0.90, 0.95, 0.99)
        ]
        assert all(v > 1.0 for v in vals)
        assert all(y < x for x, y in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(1.0, abs=0.03)

    def test_determinism(self):
        a = kappa_de_monte_carlo(0.4, 0.92, treated_scheme(), n_draws=10**5, seed=42)
        b = kappa_de_monte_carlo(0.4, 0.92, treated_scheme(), n_draws=10**5, seed=42)
        assert a == b
        c = kappa_de_monte_carlo(0.4, 0.92, treated_scheme(), n_draws=10**5, seed=43)
        assert c.value != a.value

    def test_imbalanced_gap_shrinks_with_overlap(self):
        # the MC design effect approaches the analytic variance ratio as phi -> 1
        tau, d1, d0 = LN06, 1.0, 1.0
        gaps = []
        for phi in (0.85, 0.90, 0.95, 0.99):
            est = kappa_de_monte_carlo(0.3, phi, ipw_scheme(0.3), n_draws=10**6, seed=9)
            beta = solve_ab(0.3, phi)
            vif = vif_analytic_ratio(0.3, tau, d1, d0, beta.a, beta.b)
            gaps.append(abs(est.value - vif))
        assert all(y < x for x, y in zip(gaps, gaps[1:]))

    def test_min_draws(self):
        with pytest.raises(DomainError):
            kappa_de_monte_carlo(0.5, 0.9, ipw_scheme(0.5), n_draws=100, seed=0)


class TestSampleSizeWithVif:
    def test_identity_kappa(self):
        assert sample_size_with_vif(100.0, 1.0) == 100

    def test_hand_value(self):
        assert sample_size_with_vif(100.0, 1.25) == 125

    def test_fractional_ceiling(self):
        assert sample_size_with_vif(100.3, 1.25) == 126

    def test_domain(self):
        with pytest.raises(DomainError):
            sample_size_with_vif(100.0, 0.0)

    def test_scheme_ordering_at_moderate_overlap(self):
        # overlap <= ipw <= treated in required size at phi = 0.9, r = 1/2
        kappas = {
            name: kappa_de_monte_carlo(
                0.5, 0.9, scheme_by_name(name, 0.5), n_draws=10**6, seed=17
            ).value
            for name in ("overlap", "ipw", "treated")
        }
        raw = 150.0
        n = {k: sample_size_with_vif(raw, v) for k, v in kappas.items()}
        assert n["overlap"] <= n["ipw"] <= n["treated"]
