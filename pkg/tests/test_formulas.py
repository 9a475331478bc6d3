"""Closed-form variance, ratio, sample-size, and threshold tests.

Expected values marked "oracle" were computed with an independent
high-precision transcription of the formulas (mpmath, 30 digits) and frozen.
"""

import math

import numpy as np
import pytest

from survpower import (
    DomainError,
    Variance,
    conservativeness_gamma,
    lambda_pair,
    power_at_n,
    ratio_freedman,
    ratio_schoenfeld,
    sample_size,
    sample_size_raw,
    v_freedman,
    v_hsieh_lavori,
    v_obs,
    v_rct,
    v_rct_equal_censoring,
    v_schoenfeld,
)
from survpower.errors import InfiniteVarianceError
from survpower.formulas import NOT_APPLICABLE, THRESHOLD, TRIVIAL
from survpower.overlap import BetaOverlap

LN06 = math.log(0.6)
TAU_GRID = np.linspace(-2.0, 2.0, 41)
R_GRID = (0.1, 0.25, 1 / 3, 0.5, 0.62, 0.75, 0.9)


class TestLambdaPair:
    def test_null_balanced(self):
        assert lambda_pair(0.5, 0.0) == (1.0, 1.0)

    def test_hand_values(self):
        lam1, lam0 = lambda_pair(0.5, LN06)
        assert lam1 == pytest.approx(math.sqrt(0.6), rel=1e-12)
        assert lam0 == pytest.approx(1 / math.sqrt(0.6), rel=1e-12)
        lam1, lam0 = lambda_pair(1 / 3, 0.0)
        assert lam1 == pytest.approx(math.sqrt(0.5), rel=1e-12)
        assert lam0 == pytest.approx(math.sqrt(2.0), rel=1e-12)

    @pytest.mark.parametrize("r", R_GRID)
    @pytest.mark.parametrize("tau", (-1.5, -0.5, 0.0, 0.3, 2.0))
    def test_product_identity(self, r, tau):
        lam1, lam0 = lambda_pair(r, tau)
        assert lam1 * lam0 == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("r", (0.0, 1.0, -0.2, 1.3))
    def test_domain(self, r):
        with pytest.raises(DomainError):
            lambda_pair(r, 0.0)


class TestVRct:
    def test_null_is_schoenfeld(self):
        assert v_rct(0.5, 0.0, 1, 1).value == pytest.approx(4.0, rel=1e-14)

    def test_balanced_moderate_effect(self):
        # oracle: (lam1+lam0)^2 (lam1^2+lam0^2)/2 = 2cosh(t)(cosh(t)+1)
        assert v_rct(0.5, LN06, 1, 1).value == pytest.approx(4.835555555555556, rel=1e-12)

    def test_unequal_rates(self):
        # oracle: independent transcription at r=1/3, HR=0.6, d1=0.8, d0=1
        assert v_rct(1 / 3, LN06, 0.8, 1.0).value == pytest.approx(
            7.041666666666667, rel=1e-12
        )

    @pytest.mark.parametrize("r", R_GRID)
    @pytest.mark.parametrize("tau", (-0.9, -0.2, 0.0, 0.4))
    def test_label_symmetry(self, r, tau):
        a = v_rct(r, tau, 0.7, 0.9).value
        b = v_rct(1 - r, -tau, 0.9, 0.7).value
        assert a == pytest.approx(b, rel=1e-12)

    @pytest.mark.parametrize("r", R_GRID)
    @pytest.mark.parametrize("tau", (-0.9, 0.0, 0.4))
    @pytest.mark.parametrize("d", (0.3, 0.8, 1.0))
    def test_equal_censoring_identity(self, r, tau, d):
        assert v_rct_equal_censoring(r, tau, d).value == pytest.approx(
            v_rct(r, tau, d, d).value, rel=1e-12
        )

    def test_equal_censoring_values(self):
        assert v_rct_equal_censoring(0.5, 0.0, 1.0).value == pytest.approx(4.0)
        # halving d doubles the d=1 value
        assert v_rct_equal_censoring(0.5, LN06, 0.5).value == pytest.approx(
            2 * 4.835555555555556, rel=1e-12
        )

    def test_bad_rates(self):
        with pytest.raises(DomainError):
            v_rct(0.5, 0.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            v_rct(0.5, 0.0, 1.0, 1.2)


class TestLogRankComparators:
    def test_schoenfeld_values(self):
        assert v_schoenfeld(0.5).value == pytest.approx(4.0)
        assert v_schoenfeld(1 / 3).value == pytest.approx(4.5)
        assert v_schoenfeld(0.5).scale == "events"

    @pytest.mark.parametrize("r", R_GRID)
    def test_schoenfeld_symmetry(self, r):
        assert v_schoenfeld(r).value == pytest.approx(v_schoenfeld(1 - r).value)

    def test_freedman_value(self):
        # oracle: tau^2 coth^2(tau/2) at tau = ln 0.6
        assert v_freedman(0.5, LN06).value == pytest.approx(
            4.175085086334615, rel=1e-12
        )

    def test_freedman_null_limit(self):
        for r in R_GRID:
            assert v_freedman(r, 0.0).value == pytest.approx(v_schoenfeld(r).value)

    def test_events_ratio_vs_freedman(self):
        # the corrected variance needs 1.16x Freedman's events at HR=0.6
        events = v_rct(0.5, LN06, 1, 1).to_events(1.0).value
        assert events / v_freedman(0.5, LN06).value == pytest.approx(1.16, abs=0.005)

    def test_ratio_values_from_text(self):
        for hr, expect_s, expect_f in (
            (0.8, 1.04, 1.03),
            (0.6, 1.21, 1.16),
            (0.4, 1.78, 1.55),
        ):
            assert ratio_schoenfeld(math.log(hr)) == pytest.approx(expect_s, abs=0.005)
            assert ratio_freedman(math.log(hr)) == pytest.approx(expect_f, abs=0.005)

    def test_ratios_at_null(self):
        assert ratio_schoenfeld(0.0) == 1.0
        assert ratio_freedman(0.0) == 1.0

    def test_ordering_on_grid(self):
        # event-scale ordering: corrected >= Freedman >= Schoenfeld, ties only at 0
        for tau in TAU_GRID:
            vr = v_rct(0.5, tau, 1, 1).value  # d=1: numerically event scale
            vf = v_freedman(0.5, tau).value
            vs = v_schoenfeld(0.5).value
            assert vr >= vf - 1e-12
            assert vf >= vs - 1e-12
            if abs(tau) > 1e-8:
                assert vr > vf > vs

    def test_ratios_even_and_increasing(self):
        for tau in TAU_GRID:
            assert ratio_schoenfeld(tau) == pytest.approx(ratio_schoenfeld(-tau), rel=1e-12)
            assert ratio_freedman(tau) == pytest.approx(ratio_freedman(-tau), rel=1e-12)
        pos = [t for t in TAU_GRID if t > 0]
        rs = [ratio_schoenfeld(t) for t in pos]
        rf = [ratio_freedman(t) for t in pos]
        assert all(b > a for a, b in zip(rs, rs[1:]))
        assert all(b > a for a, b in zip(rf, rf[1:]))


class TestVObs:
    def test_hand_value(self):
        assert v_obs(0.5, 0.0, 1, 1, BetaOverlap(3, 3)).value == pytest.approx(5.0)

    def test_rct_limit(self):
        big = BetaOverlap(1e8, 1e8)
        assert v_obs(0.5, LN06, 1, 1, big).value == pytest.approx(
            v_rct(0.5, LN06, 1, 1).value, rel=1e-6
        )

    def test_pole(self):
        huge = v_obs(0.5, 0.0, 1, 1, BetaOverlap(1.01, 1.01)).value
        assert huge > 100.0 and math.isfinite(huge)
        with pytest.raises(InfiniteVarianceError) as err:
            v_obs(0.5, 0.0, 1, 1, BetaOverlap(1.0, 1.0))
        assert err.value.min_phi == pytest.approx(math.pi / 4, rel=1e-12)
        assert f"{err.value.min_phi:.4f}" in str(err.value)

    @pytest.mark.parametrize("a", (1.5, 2.0, 4.0, 10.0))
    @pytest.mark.parametrize("b", (1.5, 3.0, 8.0))
    def test_dominates_rct_and_monotone(self, a, b):
        # r matched to the Beta model; shrinking overlap at fixed r scales
        # both shapes, which is the direction the variance decreases in
        tau, d1, d0 = LN06, 0.8, 0.9
        r = a / (a + b)
        base = v_obs(r, tau, d1, d0, BetaOverlap(a, b)).value
        assert base >= v_rct(r, tau, d1, d0).value - 1e-12
        scaled = [
            v_obs(r, tau, d1, d0, BetaOverlap(k * a, k * b)).value
            for k in (1.0, 1.3, 2.0, 5.0)
        ]
        assert all(y < x for x, y in zip(scaled, scaled[1:]))


class TestHsiehLavori:
    def test_hand_value(self):
        assert v_hsieh_lavori(0.5, BetaOverlap(3, 3)).value == pytest.approx(
            4 * 7 / 6, rel=1e-12
        )

    def test_vanishing_inflation(self):
        assert v_hsieh_lavori(0.5, BetaOverlap(1e9, 1e9)).value == pytest.approx(
            4.0, rel=1e-8
        )

    @pytest.mark.parametrize("ab", ((2.0, 3.0), (1.2, 9.0), (40.0, 8.0)))
    def test_r_squared_identity(self, ab):
        a, b = ab
        r2 = 1.0 / (a + b + 1.0)
        assert 1.0 + 1.0 / (a + b) == pytest.approx(1.0 / (1.0 - r2), rel=1e-12)


class TestSampleSize:
    def test_worked_example(self):
        assert sample_size(Variance(4.0), LN06, 0.05, 0.8, sides=1) == 95

    def test_power_roundtrip(self):
        p = power_at_n(Variance(4.0), LN06, 0.05, 95)
        assert 0.80 <= p <= 0.81
        assert p == pytest.approx(0.8008336, abs=1e-6)

    def test_doubling_linearity(self):
        raw = sample_size_raw(Variance(4.0), LN06, 0.05, 0.8)
        assert sample_size_raw(Variance(8.0), LN06, 0.05, 0.8) == pytest.approx(
            2 * raw, rel=1e-12
        )

    def test_power_equals_alpha_limit(self):
        assert sample_size_raw(Variance(4.0), LN06, 0.05, 0.05) == pytest.approx(
            0.0, abs=1e-20
        )

    def test_two_sided_substitution(self):
        n1 = sample_size(Variance(4.0), LN06, 0.10, 0.8, sides=2)
        n2 = sample_size(Variance(4.0), LN06, 0.05, 0.8, sides=1)
        assert n1 == n2

    def test_monotone_in_effect_and_power(self):
        taus = np.linspace(0.1, 1.5, 12)
        sizes = [sample_size(Variance(4.0), -t, 0.05, 0.8) for t in taus]
        assert all(b <= a for a, b in zip(sizes, sizes[1:]))
        powers = np.linspace(0.5, 0.95, 10)
        sizes = [sample_size(Variance(4.0), LN06, 0.05, p) for p in powers]
        assert all(b >= a for a, b in zip(sizes, sizes[1:]))

    def test_degenerate_tau(self):
        with pytest.raises(DomainError):
            sample_size(Variance(4.0), 0.0, 0.05, 0.8)
        with pytest.raises(DomainError):
            power_at_n(Variance(4.0), 0.0, 0.05, 100)

    def test_power_at_zero_n(self):
        assert power_at_n(Variance(4.0), LN06, 0.05, 0) == pytest.approx(0.05, abs=1e-12)

    def test_event_scale_rejected(self):
        with pytest.raises(DomainError):
            sample_size(v_schoenfeld(0.5), LN06, 0.05, 0.8)

    def test_scale_conversion(self):
        v = v_schoenfeld(0.5).to_units(0.5)
        assert v.value == pytest.approx(8.0)
        assert v.scale == "units"
        back = v.to_events(0.5)
        assert back.value == pytest.approx(4.0)


class TestConservativenessGamma:
    def test_paper_consistent_middle_value(self):
        got = conservativeness_gamma(0.5, LN06)
        assert got.status == THRESHOLD
        assert got.value == pytest.approx(0.078, abs=0.002)

    def test_formula_regression_values(self):
        # frozen from direct high-precision evaluation
        expected = {0.8: 0.1073741824, 0.6: 0.07776, 0.4: 0.04715560318259695}
        for hr, want in expected.items():
            assert conservativeness_gamma(0.5, math.log(hr)).value == pytest.approx(
                want, rel=1e-10
            )

    def test_small_arm_trivial_values(self):
        got = conservativeness_gamma(1 / 3, math.log(0.8))
        assert got.value == pytest.approx(1.048576e-4, rel=1e-10)
        assert got.status == TRIVIAL
        assert conservativeness_gamma(1 / 3, math.log(0.6)).value == pytest.approx(
            0.00243, rel=1e-10
        )
        assert conservativeness_gamma(1 / 3, math.log(0.4)).value == pytest.approx(
            0.004678428381140585, rel=1e-10
        )

    def test_symmetric_case(self):
        direct = conservativeness_gamma(1 / 3, LN06)
        mirrored = conservativeness_gamma(2 / 3, -LN06)
        assert mirrored.value == pytest.approx(direct.value, rel=1e-12)

    def test_not_applicable_outside_sign_condition(self):
        assert conservativeness_gamma(1 / 3, 0.3).status == NOT_APPLICABLE
        assert conservativeness_gamma(2 / 3, -0.3).status == NOT_APPLICABLE
        assert conservativeness_gamma(1 / 3, 0.3).value is None

    def test_degenerate_tau(self):
        with pytest.raises(DomainError):
            conservativeness_gamma(0.5, 0.0)
