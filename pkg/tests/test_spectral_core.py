import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from muskat_lab.spectral_core import (AlphaParams, GridSpec, ScalarField, apply_fractional_laplacian,
                                      forward, fourier_norm, gradient, hessian, inverse, refined_sup,
                                      spectral_shift, sup_norms)

from conftest import band_field


def cos_field(grid, k1=1, k2=0, amp=1.0):
    x1, x2 = grid.coords()
    return ScalarField(grid, amp * np.cos(2 * np.pi * (k1 * x1 / grid.lx + k2 * x2 / grid.ly)))


class TestGrid:
    @pytest.mark.parametrize("n", [15, 8, 17, 0])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ValueError):
            GridSpec(n, 32)

    def test_rejects_bad_period(self):
        with pytest.raises(ValueError):
            GridSpec(32, 32, -1.0, 1.0)

    def test_field_rejects_nan(self, grid64):
        v = np.zeros(grid64.shape)
        v[3, 4] = np.nan
        with pytest.raises(ValueError):
            ScalarField(grid64, v)

    def test_alpha_params(self):
        ap = AlphaParams(0.25)
        assert ap.beta == 1.625 and ap.order == 1.25
        for bad in (-0.1, 1.0, 1.2):
            with pytest.raises(ValueError):
                AlphaParams(bad)
        with pytest.raises(ValueError):
            AlphaParams(0.5).require_global_regime()


class TestTransforms:
    def test_zero(self, grid64):
        assert not np.any(forward(ScalarField(grid64, np.zeros(grid64.shape))).coeffs)

    def test_single_mode(self):
        g = GridSpec(32, 32, 3.0, 5.0)
        c = forward(cos_field(g)).coeffs
        assert_allclose(c[0, 1], 0.5, atol=1e-15)
        assert_allclose(c[0, -1], 0.5, atol=1e-15)
        c[0, 1] = c[0, -1] = 0
        assert np.max(np.abs(c)) < 1e-15

    def test_round_trip_seeded(self, grid64):
        rng = np.random.default_rng(42)
        for _ in range(100):
            f = ScalarField(grid64, rng.standard_normal(grid64.shape))
            r = inverse(forward(f)).values
            assert np.linalg.norm(r - f.values) <= 1e-12 * np.linalg.norm(f.values)

    def test_parseval(self, grid64):
        f = ScalarField(grid64, np.random.default_rng(1).standard_normal(grid64.shape))
        lhs = np.mean(f.values**2)
        rhs = np.sum(np.abs(forward(f).coeffs) ** 2)
        assert_allclose(lhs, rhs, rtol=1e-12)


class TestFractionalLaplacian:
    def test_single_modes(self, grid64):
        # round-off in the other modes is amplified by |k|^s, hence atol
        F = forward(cos_field(grid64, 1))
        assert_allclose(apply_fractional_laplacian(F, 1.5).coeffs, F.coeffs, atol=1e-12)
        F = forward(cos_field(grid64, 2))
        G = apply_fractional_laplacian(F, 1.5).coeffs
        assert_allclose(G[0, 2], 2**1.5 * F.coeffs[0, 2], rtol=1e-14)
        assert_allclose(G, 2**1.5 * F.coeffs, atol=1e-12)
        assert_allclose(2**1.5, 2.828427, atol=1e-6)

    def test_constant_annihilated(self, grid64):
        F = forward(ScalarField(grid64, np.full(grid64.shape, 3.0)))
        assert not np.any(apply_fractional_laplacian(F, 0.7).coeffs)

    @given(s1=st.floats(0, 3), s2=st.floats(0, 3))
    @settings(max_examples=25, deadline=None)
    def test_semigroup(self, s1, s2):
        g = GridSpec(32, 32)
        F = forward(band_field(g, 1.0, 6, seed=3))
        a = apply_fractional_laplacian(apply_fractional_laplacian(F, s1), s2).coeffs
        b = apply_fractional_laplacian(F, s1 + s2).coeffs
        assert np.linalg.norm(a - b) <= 1e-12 * np.linalg.norm(b)

    def test_negative_order(self, grid64):
        with pytest.raises(ValueError):
            apply_fractional_laplacian(forward(cos_field(grid64)), -1)


class TestDerivatives:
    def test_sine(self, grid64):
        x1, _ = grid64.coords()
        g1, g2 = gradient(ScalarField(grid64, np.sin(x1)))
        assert_allclose(g1.values, np.cos(x1), atol=1e-13)
        assert_allclose(g2.values, 0, atol=1e-13)

    def test_constant(self, grid64):
        g1, g2 = gradient(ScalarField(grid64, np.full(grid64.shape, 2.0)))
        assert not np.any(g1.values) and not np.any(g2.values)

    def test_finite_difference_second_order(self):
        errs = []
        for n in (32, 64, 128):
            g = GridSpec(n, n)
            f = band_field(g, 1.0, 4, seed=5)
            g1, _ = gradient(f)
            fd = (np.roll(f.values, -1, 1) - np.roll(f.values, 1, 1)) / (2 * g.hx)
            errs.append(np.max(np.abs(fd - g1.values)))
        rates = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(rates > 1.9)

    def test_hessian_mixed(self, grid64):
        x1, x2 = grid64.coords()
        f11, f12, f22 = hessian(ScalarField(grid64, np.sin(x1) * np.sin(2 * x2)))
        assert_allclose(f12.values, 2 * np.cos(x1) * np.cos(2 * x2), atol=1e-12)
        assert_allclose(f22.values, -4 * np.sin(x1) * np.sin(2 * x2), atol=1e-12)


class TestNorms:
    def test_fourier_norm_examples(self, grid64):
        assert_allclose(fourier_norm(cos_field(grid64), 1.0), 1.0, rtol=1e-12)
        assert fourier_norm(ScalarField(grid64, np.zeros(grid64.shape)), 1.0) == 0.0
        x1, x2 = grid64.coords()
        assert_allclose(fourier_norm(ScalarField(grid64, np.cos(x1) + np.cos(2 * x2)), 2.0), 5.0, rtol=1e-12)

    def test_zero_mode(self, grid64):
        f = ScalarField(grid64, np.full(grid64.shape, 2.0))
        assert fourier_norm(f, 0.0) == 0.0
        assert_allclose(fourier_norm(f, 0.0, include_zero=True), 2.0)

    @given(c=st.floats(-1e3, 1e3), s=st.floats(0, 4))
    @settings(max_examples=30, deadline=None)
    def test_homogeneous(self, c, s):
        f = band_field(GridSpec(32, 32), 1.0, 5, seed=2)
        assert fourier_norm(c * f, s) == pytest.approx(abs(c) * fourier_norm(f, s), rel=1e-14, abs=1e-300)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_wiener_norm_dominates_gradient(self, seed):
        f = band_field(GridSpec(32, 32), 1.0, 6, seed=seed)
        assert sup_norms(f, refine=True).grad_linf <= fourier_norm(f, 1.0) * (1 + 1e-12)

    def test_sup_norms_cosine(self, grid64):
        n = sup_norms(cos_field(grid64), refine=True)
        assert_allclose([n.linf, n.grad_linf, n.mass], [1, 1, 0], atol=1e-13)

    def test_sup_norms_zero(self, grid64):
        assert tuple(sup_norms(ScalarField(grid64, np.zeros(grid64.shape)), refine=True)) == (0, 0, 0, 0)

    def test_gaussian_l1(self):
        g = GridSpec(256, 256)
        x1, x2 = g.coords()
        v = np.exp(-((x1 - np.pi) ** 2 + (x2 - np.pi) ** 2) / (2 * 0.25))
        assert abs(sup_norms(ScalarField(g, v)).l1 - 2 * np.pi * 0.25) <= 1e-6

    def test_refined_sup_off_grid_peak(self):
        g = GridSpec(32, 32)
        x1, x2 = g.coords()
        x0 = (1.2345, 2.2222)
        f = ScalarField(g, np.exp(np.cos(x1 - x0[0]) + np.cos(x2 - x0[1])))
        val, pt = refined_sup(f, "abs")
        assert_allclose(val, np.exp(2.0), rtol=1e-13)
        assert_allclose(pt, x0, atol=1e-6)
        assert np.max(np.abs(f.values)) < val


def test_spectral_shift_lattice(grid64):
    f = band_field(grid64, 1.0, 5, seed=9)
    s = spectral_shift(f, (3 * grid64.hx, -2 * grid64.hy))
    assert_allclose(s.values, np.roll(np.roll(f.values, -3, 1), 2, 0), atol=1e-13)
