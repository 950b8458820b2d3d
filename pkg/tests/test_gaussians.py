import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interestboard.errors import NumericalError
from interestboard.gaussians import FLAT, Gaussian1D, truncation_moments
from oracles import mills_vw_exact, truncated_normal_vw

finite_means = st.floats(-1e6, 1e6, allow_nan=False)
positive_variances = st.floats(1e-6, 1e6, allow_nan=False)
# Ranges where the 1e-9 round-trip contract is meaningful: with precisions
# spanning 12 decades, float cancellation alone exceeds any fixed tolerance.
moderate_means = st.floats(-100.0, 100.0, allow_nan=False)
moderate_variances = st.floats(1e-3, 1e3, allow_nan=False)


def proper(mean: float, variance: float) -> Gaussian1D:
    return Gaussian1D.from_moments(mean, variance)


class TestMoments:
    def test_standard_normal(self):
        g = proper(0.0, 1.0)
        assert g.precision == 1.0
        assert g.precision_mean == 0.0

    def test_rating_scale_values(self):
        g = proper(25.0, (25.0 / 3.0) ** 2)
        assert g.precision == pytest.approx(9.0 / 625.0, rel=1e-12)
        assert g.precision_mean == pytest.approx(0.36, rel=1e-12)

    def test_negative_mean(self):
        g = proper(-3.0, 0.25)
        assert g.precision == pytest.approx(4.0, rel=1e-12)
        assert g.precision_mean == pytest.approx(-12.0, rel=1e-12)

    @given(finite_means, positive_variances)
    def test_round_trip(self, mean, variance):
        m, v = proper(mean, variance).to_moments()
        assert m == pytest.approx(mean, rel=1e-12, abs=1e-12)
        assert v == pytest.approx(variance, rel=1e-12)

    @pytest.mark.parametrize("variance", [0.0, -1.0, math.inf, math.nan])
    def test_bad_variance_rejected(self, variance):
        with pytest.raises(ValueError):
            Gaussian1D.from_moments(0.0, variance)

    def test_flat_has_no_moments(self):
        with pytest.raises(ValueError):
            FLAT.to_moments()

    def test_negative_precision_rejected(self):
        with pytest.raises(ValueError):
            Gaussian1D(-0.5, 0.0)

    def test_flat_with_linear_term_rejected(self):
        with pytest.raises(ValueError):
            Gaussian1D(0.0, 1.0)


class TestMultiplyDivide:
    def test_equal_precision_product(self):
        got = proper(0.0, 1.0) * proper(0.0, 1.0)
        assert got.to_moments() == pytest.approx((0.0, 0.5))

    def test_flat_is_identity(self):
        a = proper(1.5, 2.5)
        assert a * FLAT == a
        assert FLAT * a == a

    def test_symmetric_midpoint(self):
        got = proper(1.0, 1.0) * proper(3.0, 1.0)
        assert got.to_moments() == pytest.approx((2.0, 0.5))

    def test_self_division_is_flat(self):
        a = proper(0.3, 1.7)
        assert (a / a).is_flat

    def test_divide_inverts_multiply_example(self):
        got = proper(0.0, 0.5) / proper(0.0, 1.0)
        assert got.to_moments() == pytest.approx((0.0, 1.0))

    def test_negative_result_precision_raises(self):
        with pytest.raises(NumericalError):
            proper(0.0, 1.0) / proper(0.0, 0.5)

    @given(moderate_means, moderate_variances, moderate_means, moderate_variances)
    def test_multiply_divide_round_trip(self, m1, v1, m2, v2):
        a, b = proper(m1, v1), proper(m2, v2)
        back = (a * b) / b
        assert back.precision == pytest.approx(a.precision, rel=1e-9, abs=1e-9)
        assert back.precision_mean == pytest.approx(
            a.precision_mean, rel=1e-9, abs=1e-9
        )

    @given(
        finite_means, positive_variances,
        finite_means, positive_variances,
        finite_means, positive_variances,
    )
    def test_multiply_commutative_associative(self, m1, v1, m2, v2, m3, v3):
        a, b, c = proper(m1, v1), proper(m2, v2), proper(m3, v3)
        ab = a * b
        ba = b * a
        assert ab.precision == pytest.approx(ba.precision, rel=1e-12)
        assert ab.precision_mean == pytest.approx(ba.precision_mean, rel=1e-12, abs=1e-12)
        left = (a * b) * c
        right = a * (b * c)
        assert left.precision == pytest.approx(right.precision, rel=1e-12)
        assert left.precision_mean == pytest.approx(
            right.precision_mean, rel=1e-12, abs=1e-12
        )


class TestTruncationMoments:
    # Frozen from the mpmath quadrature oracle (truncated_normal_vw).
    ORACLE_VALUES = {
        0.0: (0.7978845608028654, 0.6366197723675814),
        -8.0: (8.121368112236171, 0.9856751165571394),
    }

    def test_at_zero(self):
        v, w = truncation_moments(0.0)
        assert v == pytest.approx(math.sqrt(2.0 / math.pi), abs=1e-12)
        assert w == pytest.approx(2.0 / math.pi, abs=1e-12)

    def test_frozen_oracle_values(self):
        for t, (v_exp, w_exp) in self.ORACLE_VALUES.items():
            v, w = truncation_moments(t)
            assert v == pytest.approx(v_exp, rel=1e-10)
            assert w == pytest.approx(w_exp, rel=1e-10)

    def test_positive_asymptote(self):
        v, w = truncation_moments(8.0)
        assert 0.0 < v < 1e-14
        assert 0.0 <= w < 1e-13

    def test_negative_asymptote_near_mills_ratio(self):
        v, w = truncation_moments(-8.0)
        assert v == pytest.approx(8.0 + 1.0 / 8.0, abs=5e-3)
        assert 0.9 < w < 1.0

    @pytest.mark.parametrize("t", np.linspace(-8.0, 8.0, 33).tolist())
    def test_matches_quadrature_oracle(self, t):
        v_exp, w_exp = truncated_normal_vw(t)
        v, w = truncation_moments(t)
        assert v == pytest.approx(v_exp, abs=1e-8, rel=1e-8)
        assert w == pytest.approx(w_exp, abs=1e-8, rel=1e-8)

    def test_series_branch_matches_oracle(self):
        for t in [-30.5, -35.0, -50.0, -200.0]:
            v_exp, w_exp = mills_vw_exact(t)
            v, w = truncation_moments(t)
            assert v == pytest.approx(v_exp, rel=1e-9)
            assert w == pytest.approx(w_exp, rel=1e-6)

    def test_monotone_and_bounded_on_grid(self):
        grid = np.linspace(-30.0, 30.0, 121)
        vs, ws = zip(*(truncation_moments(float(t)) for t in grid))
        vs, ws = np.array(vs), np.array(ws)
        assert np.all(vs > 0.0)
        assert np.all((ws > 0.0) & (ws < 1.0))
        assert np.all(np.diff(vs) < 0.0)
        assert np.all(np.diff(ws) < 0.0)

    def test_extreme_inputs_never_nan(self):
        for t in [-1e6, -1e3, -30.0001, 40.0, 1e6]:
            v, w = truncation_moments(t)
            assert not math.isnan(v)
            assert not math.isnan(w)
            assert 0.0 <= w <= 1.0

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            truncation_moments(math.nan)
