import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy import integrate, special

from muskat_lab import special_fn as sf
from muskat_lab.constants import c_alpha

alphas = st.floats(0.0, 0.45)


class TestCoefficients:
    def test_small_values(self):
        assert sf.taylor_coeff(1, 0.0) == 1.5
        assert sf.taylor_coeff(2, 0.0) == 15 / 8
        assert sf.taylor_coeff(1, 0.5) == 1.75

    @pytest.mark.parametrize("alpha", [0.0, 0.1, 0.45, 0.9])
    def test_gamma_ratio(self, alpha):
        beta = 0.5 * (3 + alpha)
        n = np.arange(1, 21)
        ref = np.exp(special.gammaln(beta + n) - special.gammaln(beta) - special.gammaln(n + 1))
        assert_allclose(sf.coeff_table(20, alpha).a, ref, rtol=1e-12)

    def test_no_overflow(self):
        a = sf.coeff_table(400, 0.3).a
        assert np.all(np.isfinite(a)) and np.all(a > 0)

    def test_table_indexing(self):
        t = sf.coeff_table(5, 0.2)
        assert t[1] == t.a[0] and t[5] == t.a[4]
        with pytest.raises(IndexError):
            t[0]
        with pytest.raises(IndexError):
            t[6]

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            sf.taylor_coeff(0, 0.1)
        with pytest.raises(ValueError):
            sf.coeff_table(3, 1.0)


class TestRAlpha:
    def test_values(self):
        assert sf.r_alpha(0.0, 0.3) == 0.0
        assert sf.r_alpha(10.0, 0.0) > 0.996

    def test_small_argument_relative_accuracy(self):
        # R ~ beta z^2 near zero
        assert_allclose(sf.r_alpha(1e-8, 0.2), 1.6e-16, rtol=1e-8)

    @given(z=st.floats(-50, 50), alpha=st.floats(0, 0.99))
    def test_range_even_monotone(self, z, alpha):
        r = sf.r_alpha(z, alpha)
        assert 0.0 <= r < 1.0
        assert sf.r_alpha(-z, alpha) == r
        assert sf.r_alpha(abs(z) * 1.01 + 1e-3, alpha) >= r

    @pytest.mark.parametrize("alpha", [0.0, 0.45])
    def test_series_converges(self, alpha):
        z = np.linspace(-0.6, 0.6, 13)
        assert_allclose(sf.r_alpha_series(z, alpha, 120), sf.r_alpha(z, alpha), rtol=1e-13, atol=1e-16)


def _mp_weighted(z, alpha):
    beta = mp.mpf(3 + alpha) / 2
    z = mp.mpf(z)
    return mp.nsum(lambda n: mp.rf(beta, n) / mp.factorial(n) * (2 * n + 1) ** 2 * z ** (2 * n),
                   [1, mp.inf])


class TestWeightedSeries:
    def test_zero(self):
        assert sf.weighted_series(0.0, 0.2) == 0.0

    def test_value_at_tenth(self):
        # frozen from 50-term partial sums
        assert_allclose(sf.weighted_series(0.1, 0.0), 0.13979671411723296, rtol=1e-12)
        assert_allclose(sf.weighted_partial_sum(0.1, 0.0, 50), 0.13979671411723296, rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(z=st.floats(0.0, 0.9), alpha=alphas)
    def test_matches_high_precision_series(self, z, alpha):
        ref = float(_mp_weighted(z, alpha))
        val = sf.weighted_series(z, alpha)
        assert val == pytest.approx(ref, rel=1e-12, abs=1e-300)

    @settings(max_examples=60, deadline=None)
    @given(z=st.floats(0.0, 0.95), alpha=alphas)
    def test_matches_converged_partial_sums(self, z, alpha):
        assert sf.weighted_series(z, alpha) == pytest.approx(
            sf.weighted_partial_sum(z, alpha, 3000), rel=1e-11, abs=1e-300)

    def test_increasing_and_divergent(self):
        z = np.linspace(0, 0.999, 200)
        v = [sf.weighted_series(x, 0.3) for x in z]
        assert np.all(np.diff(v) > 0)
        assert v[-1] > 1e8

    @pytest.mark.parametrize("z", [1.0, -1.0, 1.5])
    def test_rejects_outside_disk(self, z):
        with pytest.raises(ValueError):
            sf.weighted_series(z, 0.0)


class TestHyp2f1:
    def test_identities(self):
        assert sf.hyp2f1(0.3, 1.7, 2.2, 0.0) == 1.0
        assert_allclose(sf.hyp2f1(1, 1, 2, -1.0), math.log(2), rtol=1e-14)
        assert_allclose(sf.hyp2f1(1.5, 2.5, 2.5, -0.25), 1.25**-1.5, rtol=1e-14)

    @settings(max_examples=80, deadline=None)
    @given(a=st.floats(-3, 4), b=st.floats(-3, 4), c=st.floats(0.2, 5), x=st.floats(-20, 0))
    def test_against_scipy(self, a, b, c, x):
        ref = special.hyp2f1(a, b, c, x)
        val = sf.hyp2f1(a, b, c, x)
        scale = max(1.0, abs(ref))
        assert abs(val - ref) <= 1e-10 * scale

    @pytest.mark.parametrize("x", [-0.3, -0.9, -5.0, -100.0])
    def test_ode_arguments_against_mpmath(self, x):
        for alpha in (0.0, 0.25, 0.45):
            ref = float(mp.hyp2f1(1.5, (alpha + 5) / 2, 2.5, x))
            assert_allclose(sf.hyp2f1(1.5, (alpha + 5) / 2, 2.5, x), ref, rtol=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            sf.hyp2f1(1, 1, 0, -0.5)
        with pytest.raises(ValueError):
            sf.hyp2f1(1, 1, -2.0, -0.5)
        with pytest.raises(ValueError):
            sf.hyp2f1(1, 1, 2, 0.5)


class TestOdeSolution:
    def test_origin(self):
        assert sf.ode_solution_g(0.0, 0.3) == 0.0

    @pytest.mark.parametrize("alpha", [0.0, 0.25, 0.45, 0.8])
    def test_residual_against_mpmath_derivative(self, alpha):
        beta = mp.mpf(3 + alpha) / 2

        def g(z):
            return (3 + alpha) * z**3 * (1 + z * z) ** beta / 3 * mp.hyp2f1(1.5, (alpha + 5) / 2, 2.5, -z * z)

        for z in np.linspace(-3, 3, 13):
            dg = float(mp.diff(g, mp.mpf(z)))
            gz = sf.ode_solution_g(z, alpha)
            res = (1 + z * z) * dg - (3 + alpha) * z * gz - (3 + alpha) * z * z
            assert abs(res) <= 1e-10 * max(1.0, abs(gz))

    @given(z=st.floats(-4, 4), alpha=st.floats(0, 0.99))
    def test_odd(self, z, alpha):
        assert sf.ode_solution_g(-z, alpha) == pytest.approx(-sf.ode_solution_g(z, alpha), rel=1e-14, abs=1e-300)

    @pytest.mark.parametrize("alpha", [0.0, 0.3, 0.45])
    def test_h_is_antiderivative(self, alpha):
        for z in (0.2, 1.0, 3.0, -2.0):
            ref, _ = integrate.quad(lambda s: (3 + alpha) * s * s * (1 + s * s) ** (-(5 + alpha) / 2),
                                    0.0, z, epsabs=1e-14, epsrel=1e-13)
            assert abs(sf.h_function(z, alpha) - ref) <= 1e-12


def _mp_half_line(alpha):
    # int_0^inf sin(u) u^(-1-alpha) du = Gamma(-alpha) sin(-pi alpha/2), pi/2 at alpha = 0
    if alpha == 0:
        return mp.pi / 2
    return mp.gamma(-alpha) * mp.sin(-mp.pi * alpha / 2)


class TestPVIntegral:
    def test_zero(self):
        assert sf.pv_exp_integral(0.0, 0.3) == 0.0

    def test_half_alpha(self):
        # twice the half-line value sqrt(2 pi)
        assert_allclose(sf.pv_exp_integral(1.0, 0.5), 2 * math.sqrt(2 * math.pi), rtol=1e-10)
        assert_allclose(0.5 * sf.pv_exp_integral(1.0, 0.5), 2.50663, rtol=1e-5)

    def test_alpha_zero_limit(self):
        assert abs(sf.pv_exp_integral(1.0, 0.0) - math.pi) <= 1e-9
        assert abs(sf.pv_exp_integral(1.0, 1e-6) - math.pi) <= 1e-4

    @pytest.mark.parametrize("alpha", [0.05, 0.25, 0.45, 0.7, 0.95])
    def test_against_gamma_formula(self, alpha):
        ref = 2 * float(_mp_half_line(alpha))
        assert_allclose(sf.pv_exp_integral(1.0, alpha), ref, rtol=1e-9)

    @given(S=st.floats(-100, 100), alpha=st.floats(0, 0.99))
    def test_odd_and_homogeneous(self, S, alpha):
        v = sf.pv_exp_integral(S, alpha)
        assert sf.pv_exp_integral(-S, alpha) == -v
        if S != 0:
            assert v == pytest.approx(np.sign(S) * abs(S) ** alpha * sf.pv_exp_integral(1.0, alpha), rel=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(S=st.floats(-100, 100), alpha=st.floats(0, 0.999))
    def test_bound(self, S, alpha):
        assert abs(sf.pv_exp_integral(S, alpha)) <= c_alpha(alpha) * abs(S) ** alpha * (1 + 1e-9)
