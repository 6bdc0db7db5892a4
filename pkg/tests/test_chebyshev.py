import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhjacobi.chebyshev import (
    ChebSeries,
    adaptive_coeffs,
    cheb_points,
    clenshaw_curtis,
    coeffs_to_vals,
    diff_series,
    eval_series,
    int_series,
    vals_to_coeffs,
)
from rhjacobi.errors import EvaluationError, InvalidDomainError

EPS = np.finfo(float).eps


class TestChebPoints:
    def test_two_points_are_endpoints(self):
        assert np.allclose(cheb_points(2), [-1.0, 1.0])

    def test_three_points_unit(self):
        assert np.allclose(cheb_points(3), [-1.0, 0.0, 1.0])

    def test_three_points_mapped(self):
        assert np.allclose(cheb_points(3, (0.0, 2.0)), [0.0, 1.0, 2.0])

    def test_ascending(self):
        pts = cheb_points(17, (-3.0, 5.0))
        assert np.all(np.diff(pts) > 0)

    def test_degenerate_interval_rejected(self):
        with pytest.raises(InvalidDomainError):
            cheb_points(4, (1.0, 1.0))

    def test_bad_count_rejected(self):
        with pytest.raises(ValueError):
            cheb_points(0)


class TestTransforms:
    def test_constant(self):
        s = vals_to_coeffs(np.ones(7))
        assert abs(s.coefficients[0] - 1.0) < 1e-15
        assert np.abs(s.coefficients[1:]).max() < 1e-15

    def test_linear_is_t1(self):
        pts = cheb_points(3)
        s = vals_to_coeffs(pts)
        assert np.allclose(s.coefficients, [0.0, 1.0, 0.0], atol=1e-15)

    def test_t2_exact(self):
        pts = cheb_points(5)
        s = vals_to_coeffs(2.0 * pts**2 - 1.0)
        expect = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
        assert np.allclose(s.coefficients, expect, atol=1e-14)

    def test_coeffs_to_vals_t1(self):
        vals = coeffs_to_vals(ChebSeries(np.array([0.0, 1.0, 0.0])))
        assert np.allclose(vals, [-1.0, 0.0, 1.0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            vals_to_coeffs(np.array([]))

    @pytest.mark.parametrize("m", [2, 3, 5, 8, 9, 16, 17, 33, 100, 129])
    def test_round_trip_random(self, m):
        rng = np.random.default_rng(m)
        c = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        s = ChebSeries(c, (-2.0, 0.5))
        back = vals_to_coeffs(coeffs_to_vals(s), (-2.0, 0.5))
        assert np.abs(back.coefficients - c).max() <= 10 * EPS * m * max(1, np.abs(c).max())

    @given(st.integers(min_value=1, max_value=200))
    @settings(max_examples=30, deadline=None)
    def test_round_trip_vals_side(self, m):
        rng = np.random.default_rng(m)
        v = rng.standard_normal(m)
        s = vals_to_coeffs(v)
        assert np.abs(coeffs_to_vals(s) - v).max() <= 10 * EPS * m * max(1, np.abs(v).max())

    def test_round_trip_4096(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal(4097)
        s = vals_to_coeffs(v)
        assert np.abs(coeffs_to_vals(s) - v).max() <= 10 * EPS * 4097 * np.abs(v).max()

    def test_polynomial_tail_exact(self):
        # degree-4 polynomial sampled at 12 points: coefficients beyond 4 vanish
        pts = cheb_points(12, (-1.5, 2.0))
        vals = 3.0 * pts**4 - pts**2 + 0.25
        c = vals_to_coeffs(vals, (-1.5, 2.0)).coefficients
        assert np.abs(c[5:]).max() <= 1e-14 * np.abs(c).max()


class TestEval:
    def test_t2_at_zero(self):
        assert eval_series(ChebSeries(np.array([0.0, 0.0, 1.0])), 0.0) == pytest.approx(-1.0)

    def test_t1_at_i(self):
        assert eval_series(ChebSeries(np.array([0.0, 1.0])), 1j) == pytest.approx(1j)

    def test_exponential(self):
        pts = cheb_points(20)
        s = vals_to_coeffs(np.exp(pts))
        assert abs(eval_series(s, 0.3) - math.exp(0.3)) < 1e-13

    def test_vectorized(self):
        s = vals_to_coeffs(np.exp(cheb_points(20)))
        z = np.array([0.0, 0.3, -0.7])
        assert np.allclose(eval_series(s, z), np.exp(z), atol=1e-13)


class TestDiff:
    def test_linear(self):
        d = diff_series(ChebSeries(np.array([0.0, 1.0])))
        assert np.allclose(d.coefficients, [1.0])

    def test_t2(self):
        d = diff_series(ChebSeries(np.array([0.0, 0.0, 1.0])))
        assert np.allclose(d.coefficients, [0.0, 4.0])

    def test_sin_derivative(self):
        pts = cheb_points(30)
        d = diff_series(vals_to_coeffs(np.sin(pts)))
        x = np.linspace(-1, 1, 37)
        assert np.abs(eval_series(d, x) - np.cos(x)).max() < 1e-11

    def test_chain_rule_on_mapped_domain(self):
        dom = (1.0, 4.0)
        pts = cheb_points(24, dom)
        d = diff_series(vals_to_coeffs(pts**3, dom))
        x = np.linspace(1.0, 4.0, 11)
        assert np.abs(eval_series(d, x) - 3 * x**2).max() < 1e-10

    @given(st.integers(min_value=2, max_value=40))
    @settings(max_examples=25, deadline=None)
    def test_diff_inverts_antiderivative(self, m):
        rng = np.random.default_rng(m)
        c = rng.standard_normal(m)
        c[0] = 0.0
        s = ChebSeries(c, (-0.5, 2.5))
        back = diff_series(int_series(s))
        out = np.zeros(m)
        out[: back.coefficients.size] = back.coefficients[:m]
        assert np.abs(out - c).max() < 1e-12 * max(1.0, np.abs(c).max())


class TestClenshawCurtis:
    def test_constant(self):
        for count in (2, 3, 9):
            assert clenshaw_curtis(lambda x: 1.0, (-1, 1), count) == pytest.approx(2.0)

    def test_x_squared(self):
        assert abs(clenshaw_curtis(lambda x: x * x, (-1, 1), 5) - 2.0 / 3.0) < 1e-15

    def test_gaussian(self):
        # exact-arithmetic CC at 200 points carries 1.075e-12 truncation error
        # for this integrand (checked at 40 digits), so the bound sits just above
        val = clenshaw_curtis(lambda x: math.exp(-x * x), (-30, 30), 200)
        assert abs(val - math.sqrt(math.pi)) < 1.2e-12
        val = clenshaw_curtis(lambda x: math.exp(-x * x), (-30, 30), 256)
        assert abs(val - math.sqrt(math.pi)) < 1e-14

    @pytest.mark.parametrize("deg", range(21))
    def test_polynomial_exactness(self, deg):
        coeffs = np.arange(1.0, deg + 2.0)
        exact = sum(c / (k + 1) * (1.0 - (-1.0) ** (k + 1)) for k, c in enumerate(coeffs))
        val = clenshaw_curtis(lambda x: np.polyval(coeffs[::-1], x), (-1, 1), deg + 1)
        assert abs(val - exact) < 1e-12 * max(1.0, abs(exact))

    def test_nonfinite_sample_reported(self):
        with pytest.raises(EvaluationError) as exc:
            clenshaw_curtis(lambda x: math.inf if abs(x) < 1e-8 else 1.0 / x, (-1, 1), 5)
        assert abs(exc.value.point) < 1e-8


class TestAdaptive:
    def test_polynomial_truncates(self):
        s = adaptive_coeffs(lambda x: x**3 - 2 * x, (-1, 1))
        assert s.coefficients.size == 4

    def test_runge_function(self):
        s = adaptive_coeffs(lambda x: 1.0 / (1.0 + 25 * x * x), (-1, 1))
        x = np.linspace(-1, 1, 101)
        f = 1.0 / (1.0 + 25 * x * x)
        assert np.abs(eval_series(s, x) - f).max() < 1e-12
