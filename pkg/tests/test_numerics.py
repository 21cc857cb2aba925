import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from gpgw import core
from gpgw.core import GpgwParams
from gpgw.datasets import LEUKAEMIA_SURVIVAL
from gpgw.numerics import (ConvergenceError, DomainError, MinimizeConfig, gradient_fd, hessian_fd,
                           integrate, minimize, upper_incomplete_gamma)

# Gamma(2.5, 1.3) from mpmath at 40 digits; its quadrature of u^1.5 e^-u agrees to all digits
GAMMA_2P5_1P3 = 1.0121136007032034115


class TestUpperIncompleteGamma:

    def test_unit_shape_is_exponential(self):
        np.testing.assert_allclose(upper_incomplete_gamma(1.0, 0.7), math.exp(-0.7), rtol=1e-12)
        np.testing.assert_allclose(upper_incomplete_gamma(1.0, 0.7), 0.4965853, atol=5e-8)

    def test_zero_argument_is_complete_gamma(self):
        assert upper_incomplete_gamma(3.0, 0.0) == pytest.approx(2.0, rel=1e-15)

    def test_oracle_value(self):
        np.testing.assert_allclose(upper_incomplete_gamma(2.5, 1.3), GAMMA_2P5_1P3, rtol=1e-12)
        # the oracle itself, re-derived by quadrature of the integrand
        ref = integrate(lambda u: u ** 1.5 * np.exp(-u), 1.3, rel_tol=1e-13).value
        np.testing.assert_allclose(ref, GAMMA_2P5_1P3, rtol=1e-11)

    @pytest.mark.parametrize("s, x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.1), (math.nan, 1.0),
                                      (1.0, math.inf), (math.inf, 1.0)])
    def test_domain_errors(self, s, x):
        with pytest.raises(DomainError):
            upper_incomplete_gamma(s, x)

    @pytest.mark.parametrize("s", [0.5, 1.0, 2.5, 7.0])
    def test_complements_lower_gamma(self, s):
        for x in np.logspace(-4, 2, 40):
            upper = upper_incomplete_gamma(s, x)
            lower = special.gammainc(s, x) * math.gamma(s)
            np.testing.assert_allclose(upper + lower, math.gamma(s), rtol=1e-12)

    def test_monotone_in_x(self):
        for s in (0.3, 2.0, 11.0):
            values = [upper_incomplete_gamma(s, x) for x in np.linspace(0.0, 40.0, 200)]
            assert np.all(np.diff(values) <= 0.0)

    def test_matches_quadrature_of_integrand(self, rng):
        for s, x in zip(rng.uniform(0.2, 8.0, 50), rng.uniform(0.0, 20.0, 50)):
            ref = integrate(lambda u: u ** (s - 1.0) * np.exp(-u), x, rel_tol=1e-12).value
            np.testing.assert_allclose(upper_incomplete_gamma(s, x), ref, rtol=1e-9)

    @given(s=st.floats(0.05, 40.0), x=st.floats(0.0, 80.0))
    def test_agrees_with_multiprecision(self, s, x):
        ref = float(mpmath.gammainc(mpmath.mpf(s), mpmath.mpf(x)))
        np.testing.assert_allclose(upper_incomplete_gamma(s, x), ref, rtol=1e-12)

    @pytest.mark.parametrize("s, x", [(0.5, 0.3), (2.5, 1.3), (4.0, 7.5), (1.7, 12.0)])
    def test_derivative_in_x(self, s, x):
        g = gradient_fd(lambda v: upper_incomplete_gamma(s, v[0]), [x])[0]
        np.testing.assert_allclose(g, -x ** (s - 1.0) * math.exp(-x), rtol=1e-6)


class TestIntegrate:

    def test_exponential_tail(self):
        res = integrate(lambda u: np.exp(-u), 0.0)
        assert abs(res.value - 1.0) <= 1e-10
        assert res.abs_error_estimate >= 0.0
        assert res.evaluations >= 1

    def test_gamma_two_one(self):
        res = integrate(lambda u: u * np.exp(-u), 1.0)
        np.testing.assert_allclose(res.value, 2.0 / math.e, rtol=1e-10)
        np.testing.assert_allclose(res.value, 0.735759, atol=5e-7)

    def test_gpgw_density_normalizes(self):
        p = GpgwParams(0.5872, 0.0232, 10.8630, 0.1101)
        res = integrate(lambda x: core.pdf(p, x), 0.0)
        assert abs(res.value - 1.0) <= 1e-8

    def test_endpoint_singularity(self):
        res = integrate(lambda u: u ** -0.8, 0.0, 1.0, rel_tol=1e-8)
        np.testing.assert_allclose(res.value, 5.0, rtol=1e-7)

    def test_finite_interval(self):
        res = integrate(np.sin, 0.0, math.pi, rel_tol=1e-13)
        np.testing.assert_allclose(res.value, 2.0, rtol=1e-13)

    def test_budget_exhaustion_is_explicit(self):
        with pytest.raises(ConvergenceError):
            integrate(lambda u: np.sin(1.0 / u) / u, 1e-6, 1.0, rel_tol=1e-14, max_intervals=5)

    def test_non_finite_integrand(self):
        with pytest.raises(DomainError), np.errstate(divide="ignore"):
            integrate(lambda u: 1.0 / (u - 0.5), 0.0, 1.0)

    @pytest.mark.parametrize("a, b", [(1.0, 1.0), (2.0, 1.0), (-math.inf, 0.0), (0.0, math.nan)])
    def test_bad_limits(self, a, b):
        with pytest.raises(DomainError):
            integrate(np.exp, a, b)


class TestFiniteDifferences:

    def test_square(self):
        np.testing.assert_allclose(gradient_fd(lambda v: v[0] ** 2, [3.0]), [6.0], atol=1e-6)

    def test_constant(self):
        np.testing.assert_array_equal(gradient_fd(lambda v: 4.2, np.ones(3)), np.zeros(3))

    def test_non_finite_names_component(self):
        f = lambda v: v[0] + (math.inf if v[1] < 0.0 else v[1])
        with pytest.raises(DomainError, match="component 1"):
            gradient_fd(f, [1.0, 0.0])

    def test_hessian_diagonal_quadratic(self):
        h = hessian_fd(lambda v: v[0] ** 2 + 3.0 * v[1] ** 2, [0.3, -1.2])
        np.testing.assert_allclose(h, np.diag([2.0, 6.0]), atol=1e-4)

    def test_hessian_exactly_symmetric(self):
        f = lambda v: math.exp(v[0] * v[1]) + math.sin(v[2]) * v[0] ** 3
        h = hessian_fd(f, [0.4, -0.7, 1.1])
        np.testing.assert_array_equal(h, h.T)

    def test_hessian_non_finite(self):
        with pytest.raises(DomainError):
            hessian_fd(lambda v: math.inf if v[0] < 0.0 else v[0], [0.0])

    def test_exponential_standard_error(self):
        # -log L(lam) = -n log lam + lam sum x, minimized at n / sum x
        x = LEUKAEMIA_SURVIVAL.values
        lam = x.size / x.sum()
        h = hessian_fd(lambda v: -x.size * math.log(v[0]) + v[0] * x.sum(), [lam])
        # the fourth-root step is large relative to lam, hence the O(h^2) slack
        np.testing.assert_allclose(h[0, 0], x.size / lam ** 2, rtol=1e-4)
        np.testing.assert_allclose(1.0 / math.sqrt(h[0, 0]), 0.0043, atol=5e-4)


class TestMinimize:

    @pytest.mark.parametrize("with_grad", [True, False])
    def test_shifted_quadratic(self, with_grad):
        f = lambda v: (v[0] - 2.0) ** 2 + (v[1] + 1.0) ** 2
        g = (lambda v: np.array([2.0 * (v[0] - 2.0), 2.0 * (v[1] + 1.0)])) if with_grad else None
        res = minimize(f, [0.0, 0.0], g)
        np.testing.assert_allclose(res.argmin, [2.0, -1.0], atol=1e-6)
        assert res.fmin == pytest.approx(0.0, abs=1e-12)
        assert res.converged

    @given(seed=st.integers(0, 2 ** 32 - 1), dim=st.integers(1, 4))
    def test_convex_quadratic_reaches_optimum(self, seed, dim):
        r = np.random.default_rng(seed)
        m = r.normal(size=(dim, dim))
        a = m @ m.T + dim * np.eye(dim)
        target = r.normal(size=dim)
        f = lambda v: 0.5 * (v - target) @ a @ (v - target)
        res = minimize(f, np.zeros(dim), lambda v: a @ (v - target), MinimizeConfig(gtol=1e-11))
        np.testing.assert_allclose(res.argmin, target, atol=1e-8)

    def test_double_well_basins(self):
        # minima at -1 and +1 (tilted so that they differ in depth)
        f = lambda v: (v[0] ** 2 - 1.0) ** 2 + 0.1 * v[0]
        g = lambda v: np.array([4.0 * v[0] * (v[0] ** 2 - 1.0) + 0.1])
        left = minimize(f, [-0.6], g)
        right = minimize(f, [0.6], g)
        assert left.argmin[0] < 0.0 < right.argmin[0]
        np.testing.assert_allclose(g(left.argmin), 0.0, atol=1e-6)
        np.testing.assert_allclose(g(right.argmin), 0.0, atol=1e-6)
        # deterministic
        again = minimize(f, [-0.6], g)
        np.testing.assert_array_equal(again.argmin, left.argmin)

    def test_exponential_rate_on_leukaemia(self):
        x = LEUKAEMIA_SURVIVAL.values
        nll = lambda z: -(x.size * z[0] - math.exp(z[0]) * x.sum())
        res = minimize(nll, [math.log(0.01)])
        assert math.exp(res.argmin[0]) == pytest.approx(0.0245, abs=5e-4)

    def test_budget_exhaustion_flags_not_converged(self):
        f = lambda v: (1.0 - v[0]) ** 2 + 100.0 * (v[1] - v[0] ** 2) ** 2
        res = minimize(f, [-1.2, 1.0], None, MinimizeConfig(max_iter=5))
        assert not res.converged
        assert res.gradient_norm > 0.0

    def test_non_finite_start(self):
        with pytest.raises(DomainError):
            minimize(lambda v: math.inf, [0.0])
