"""Spectral densities and eigensystems against brute-force oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wienerdr.spectral import (NumericalDegeneracyError, ProcessParams,
                               SAMPLED_WIENER, SHIFTED_SAMPLED_WIENER,
                               constant_density, discrete_wiener_eigensystem,
                               fredholm_residual, interp_covariance,
                               interp_kernel_eigensystem,
                               nystrom_interp_eigenvalues, s_bar,
                               s_tilde_density)

UNIT = ProcessParams(sigma2=1.0, fs=1.0)


class TestDensities:
    def test_s_bar_values(self):
        assert s_bar(1.0) == pytest.approx(0.25, abs=1e-15)
        # sin^2(pi/3) = 3/4 and sin^2(pi/4) = 1/2
        assert s_bar(2.0 / 3.0) == pytest.approx(1.0 / 3.0, abs=1e-14)
        assert s_bar(0.5) == pytest.approx(0.5, abs=1e-15)

    def test_s_tilde_values(self):
        assert s_tilde_density(1.0) == pytest.approx(1.0 / 12.0, abs=1e-15)
        assert s_tilde_density(2.0 / 3.0) == pytest.approx(1.0 / 6.0, abs=1e-14)
        assert s_tilde_density(0.5) == pytest.approx(1.0 / 3.0, abs=1e-15)

    @pytest.mark.parametrize("phi", [0.0, -0.5, 1.0 + 1e-9, 2.0])
    def test_domain_errors(self, phi):
        with pytest.raises(ValueError):
            s_bar(phi)
        with pytest.raises(ValueError):
            s_tilde_density(phi)

    def test_array_evaluation_rejects_bad_element(self):
        with pytest.raises(ValueError):
            s_bar(np.array([0.5, 1.5]))

    @given(st.floats(min_value=1e-6, max_value=0.999),
           st.floats(min_value=1e-4, max_value=0.5))
    @settings(max_examples=60, deadline=None)
    def test_strictly_decreasing(self, phi, step):
        hi = min(phi + step, 1.0)
        assert s_bar(phi) > s_bar(hi)
        assert s_tilde_density(phi) > s_tilde_density(hi)

    def test_tilde_floor(self):
        grid = np.linspace(1e-4, 1.0, 2000)
        vals = s_tilde_density(grid)
        assert np.all(vals >= 1.0 / 12.0 - 1e-15)
        assert vals[-1] == pytest.approx(1.0 / 12.0, abs=1e-15)

    def test_crossing_closed_form(self):
        # s_bar(1/2) = 1/2, so the crossing at theta = 1/2 is phi = 1/2
        assert SAMPLED_WIENER.crossing(0.5) == pytest.approx(0.5, abs=1e-14)
        assert SAMPLED_WIENER.crossing(0.2) is None
        assert SHIFTED_SAMPLED_WIENER.crossing(1.0 / 3.0) == pytest.approx(
            0.5, abs=1e-14)
        assert constant_density(0.7).crossing(0.3) is None

    def test_constant_stub(self):
        c = constant_density(0.7)
        assert c(0.3) == 0.7
        assert np.all(c(np.array([0.1, 0.9])) == 0.7)
        with pytest.raises(ValueError):
            constant_density(0.0)


class TestProcessParams:
    @pytest.mark.parametrize("sigma2,fs", [(0.0, 1.0), (1.0, 0.0),
                                           (-1.0, 1.0), (1.0, -2.0),
                                           (np.inf, 1.0)])
    def test_rejects_non_positive(self, sigma2, fs):
        with pytest.raises(ValueError):
            ProcessParams(sigma2=sigma2, fs=fs)

    def test_ts_is_derived(self):
        assert ProcessParams(sigma2=1.0, fs=4.0).ts == 0.25


class TestDiscreteEigensystem:
    def test_n1_is_sample_variance(self):
        system = discrete_wiener_eigensystem(UNIT, 1)
        assert system.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
        system = discrete_wiener_eigensystem(ProcessParams(2.0, 4.0), 1)
        assert system.eigenvalues[0] == pytest.approx(0.5, abs=1e-12)

    def test_n2_golden_pair(self):
        # dense eigendecomposition of [[1, 1], [1, 2]] gives (3 +- sqrt 5)/2
        system = discrete_wiener_eigensystem(UNIT, 2)
        assert system.eigenvalues[0] == pytest.approx(2.618033988749895, rel=1e-12)
        assert system.eigenvalues[1] == pytest.approx(0.3819660112501051, rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 16, 33, 64])
    def test_matches_dense_eigensolver(self, n):
        params = ProcessParams(sigma2=1.7, fs=2.5)
        system = discrete_wiener_eigensystem(params, n)
        cov = (params.sigma2 / params.fs) * np.minimum.outer(
            np.arange(1, n + 1), np.arange(1, n + 1))
        dense = np.sort(np.linalg.eigvalsh(cov))[::-1]
        assert np.max(np.abs(system.eigenvalues - dense) / dense) < 1e-9

    @pytest.mark.parametrize("n", [2, 8, 64])
    def test_orthonormal_and_diagonalizing(self, n):
        system = discrete_wiener_eigensystem(UNIT, n)
        vecs = system.eigenvectors
        gram = vecs @ vecs.T
        assert np.max(np.abs(gram - np.eye(n))) < 1e-9
        cov = np.minimum.outer(np.arange(1, n + 1), np.arange(1, n + 1)).astype(float)
        for k in [1, n // 2 + 1, n]:
            v = system.eigenvector(k)
            lam = system.eigenvalues[k - 1]
            assert np.max(np.abs(cov @ v - lam * v)) < 1e-9 * lam

    @pytest.mark.parametrize("n", [1, 7, 40])
    def test_trace_identity(self, n):
        params = ProcessParams(sigma2=3.0, fs=0.5)
        system = discrete_wiener_eigensystem(params, n)
        trace = (params.sigma2 / params.fs) * n * (n + 1) / 2.0
        assert system.eigenvalues.sum() == pytest.approx(trace, rel=1e-9)

    def test_sorted_decreasing_and_positive(self):
        system = discrete_wiener_eigensystem(UNIT, 50)
        assert np.all(np.diff(system.eigenvalues) < 0)
        assert np.all(system.eigenvalues > 0)

    def test_normalizer_diagnostic(self):
        # n * A_k^2 -> 2 for the sine eigenvectors
        for n in (100, 1000):
            system = discrete_wiener_eigensystem(UNIT, n)
            diag = n * system.normalizers ** 2
            assert np.max(np.abs(diag - 2.0)) < 5.0 / n


class TestInterpEigensystem:
    def test_n1_rank_one_kernel(self):
        # kernel sigma2 * t * s / ts on [0, ts] integrates to sigma2 ts^2 / 3
        system = interp_kernel_eigensystem(UNIT, 1)
        assert system.eigenvalues[0] == pytest.approx(1.0 / 3.0, abs=1e-12)
        params = ProcessParams(sigma2=2.0, fs=4.0)
        system = interp_kernel_eigensystem(params, 1)
        assert system.eigenvalues[0] == pytest.approx(
            2.0 * 0.25 ** 2 / 3.0, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 8, 16, 64])
    def test_matches_nystrom_oracle(self, n):
        system = interp_kernel_eigensystem(UNIT, n)
        oracle = nystrom_interp_eigenvalues(UNIT, n, grid_points=200)
        rel = np.abs(system.eigenvalues - oracle) / system.eigenvalues
        assert np.max(rel) < 1e-3

    def test_dense_and_factored_nystrom_agree(self):
        for n in (1, 2, 4):
            dense = nystrom_interp_eigenvalues(UNIT, n, 120, method="dense")
            fact = nystrom_interp_eigenvalues(UNIT, n, 120, method="factored")
            assert np.max(np.abs(dense - fact) / dense) < 1e-9

    def test_dense_spectrum_has_rank_n(self):
        # beyond rank n the discretized kernel carries only quadrature noise
        n, grid = 3, 150
        params = ProcessParams(sigma2=1.0, fs=2.0)
        total = n * grid + 1
        dt = params.ts / grid
        t = np.arange(total) * dt
        w = np.full(total, dt)
        w[0] = w[-1] = dt / 2
        kmat = interp_covariance(params, t, t)
        sym = np.sqrt(w)[:, None] * kmat * np.sqrt(w)[None, :]
        vals = np.sort(np.abs(np.linalg.eigvalsh(sym)))[::-1]
        assert vals[n] < 1e-10 * vals[0]

    def test_staircase_matches_density(self):
        # the closed form reproduces the density at (k - 1/2)/n exactly, so
        # the staircase agrees to rounding at every n, not just in the limit
        params = ProcessParams(sigma2=1.0, fs=3.0)
        scale = params.sigma2 * params.ts ** 2
        for n in (100, 300, 1000):
            system = interp_kernel_eigensystem(params, n)
            k = np.arange(1, n + 1)
            target = s_tilde_density((k - 0.5) / n)
            rel = np.abs(system.eigenvalues / scale - target) / target
            assert np.max(rel) < 1e-9

    @pytest.mark.parametrize("n", [1, 5, 32])
    def test_trace_identity(self, n):
        params = ProcessParams(sigma2=2.0, fs=1.6)
        system = interp_kernel_eigensystem(params, n)
        horizon = n * params.ts
        trace = params.sigma2 * (horizon ** 2 / 2.0 - horizon * params.ts / 6.0)
        assert system.eigenvalues.sum() == pytest.approx(trace, rel=1e-9)

    def test_large_n_has_no_degenerate_denominators(self):
        interp_kernel_eigensystem(UNIT, 4096)

    def test_eigenfunctions_unit_norm_orthogonal(self):
        n = 6
        system = interp_kernel_eigensystem(UNIT, n)
        grid = 400
        t = np.linspace(0.0, n * UNIT.ts, n * grid + 1)
        dt = t[1] - t[0]
        w = np.full(len(t), dt)
        w[0] = w[-1] = dt / 2
        vals = np.array([system.eigenfunction(k, t) for k in range(1, n + 1)])
        gram = (vals * w) @ vals.T
        assert np.max(np.abs(gram - np.eye(n))) < 1e-4

    def test_eigenfunction_piecewise_linear_and_pinned(self):
        system = interp_kernel_eigensystem(UNIT, 4)
        assert system.eigenfunction(1, 0.0) == pytest.approx(0.0, abs=1e-14)
        for k in (1, 3):
            left = system.eigenfunction(k, 1.25)
            right = system.eigenfunction(k, 1.75)
            mid = system.eigenfunction(k, 1.5)
            assert mid == pytest.approx(0.5 * (left + right), abs=1e-12)

    def test_accessor_validation(self):
        system = interp_kernel_eigensystem(UNIT, 3)
        with pytest.raises(ValueError):
            system.eigenfunction(0, 0.5)
        with pytest.raises(ValueError):
            system.eigenfunction(1, 5.0)
        with pytest.raises(ValueError):
            system.eigenvector(1)
        disc = discrete_wiener_eigensystem(UNIT, 3)
        with pytest.raises(ValueError):
            disc.eigenfunction(1, 0.5)


class TestFredholmResidual:
    def test_rank_one_residual_small(self):
        system = interp_kernel_eigensystem(UNIT, 1)
        assert fredholm_residual(system, UNIT, 1, 400) < 1e-5

    def test_n4_all_modes(self):
        system = interp_kernel_eigensystem(UNIT, 4)
        for k in range(1, 5):
            assert fredholm_residual(system, UNIT, k, 400) < 1e-4

    def test_refinement_shrinks_residual(self):
        n = 8
        system = interp_kernel_eigensystem(UNIT, n)
        for k in range(1, n + 1):
            coarse = fredholm_residual(system, UNIT, k, 200)
            fine = fredholm_residual(system, UNIT, k, 800)
            assert fine < coarse

    def test_scales_with_kernel_units(self):
        params = ProcessParams(sigma2=4.0, fs=2.0)
        system = interp_kernel_eigensystem(params, 2)
        scale = params.sigma2 * params.ts ** 2
        assert fredholm_residual(system, params, 1, 400) < 1e-4 * scale

    def test_validation(self):
        system = interp_kernel_eigensystem(UNIT, 2)
        with pytest.raises(ValueError):
            fredholm_residual(system, UNIT, 3, 400)
        with pytest.raises(ValueError):
            fredholm_residual(system, UNIT, 1, 10)
