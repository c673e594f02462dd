"""Kernel calculus contracts: square roots, gauges, projectors, perturbation."""

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from nlmedia.errors import IllConditionedError, ModelValidityError, PositivityError
from nlmedia.grids import (
    DiscreteKernel,
    PeriodicGrid,
    from_local_scalar,
    from_symbol,
    identity_kernel,
    symbol_at,
)
from nlmedia.operator_algebra import (
    ContractError,
    curl_gauge_V,
    eigendecompose,
    gauge_transform,
    helmholtz_projectors,
    homogeneous_curl_K,
    inhomogeneous_sigma,
    inverse_kernel,
    naive_inhomogeneous_K,
    perturbative_K,
    principal_axis_projectors,
    sign_flip_gauge,
    sqrt_defect,
    sqrt_kernel,
    yukawa_m0,
)
from nlmedia.response import (
    DrudeLorentzParams,
    LocalAnisotropic,
    hydrodynamic_model,
    magnetodielectric_homogeneous_model,
)

GRID = PeriodicGrid((3, 3, 3))


def _random_hermitian_psd(grid, rng, scale=1.0):
    n = 3 * grid.n_points
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return DiscreteKernel(grid, scale * (a @ a.conj().T) / n)


class TestEigendecompose:
    def test_identity(self):
        dec = eigendecompose(identity_kernel(GRID))
        assert np.allclose(dec.eigenvalues, 1.0)

    def test_local_diagonal_kernel_spectrum(self):
        vals = np.linspace(0.5, 2.0, GRID.n_points)
        sigma = from_local_scalar(GRID, vals)
        dec = eigendecompose(sigma)
        expected = np.sort(np.repeat(vals, 3))[::-1]
        assert np.allclose(dec.eigenvalues, expected, rtol=1e-12)

    def test_reconstruction(self):
        sigma = _random_hermitian_psd(GRID, np.random.default_rng(0))
        dec = eigendecompose(sigma)
        res = np.linalg.norm(dec.reconstruct().matrix - sigma.matrix)
        assert res <= 1e-12 * sigma.norm()

    def test_non_hermitian_rejected(self):
        rng = np.random.default_rng(1)
        n = 3 * GRID.n_points
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        with pytest.raises(ContractError):
            eigendecompose(DiscreteKernel(GRID, m))


class TestSqrtKernel:
    def test_scaled_identity(self):
        k = sqrt_kernel(3.0 * identity_kernel(GRID))
        assert np.allclose(k.matrix, np.sqrt(3.0) * np.eye(k.dim), atol=1e-13)

    def test_diagonal_local_kernel(self):
        vals = np.linspace(0.25, 4.0, GRID.n_points)
        k = sqrt_kernel(from_local_scalar(GRID, vals))
        ref = from_local_scalar(GRID, np.sqrt(vals))
        assert np.allclose(k.matrix, ref.matrix, atol=1e-12)

    def test_homogeneous_isotropic_vs_per_mode_sqrtm(self):
        model = hydrodynamic_model(1.3, 0.3, 0.4)
        sigma = model.sigma_kernel(GRID, 1.1)
        k = sqrt_kernel(sigma)
        assert sqrt_defect(k, sigma) <= 1e-10
        for mode in (0, 5, 13):
            sym = symbol_at(sigma, mode)
            ref = scipy.linalg.sqrtm(sym)
            assert np.allclose(symbol_at(k, mode), ref, atol=1e-10)

    def test_positivity_error(self):
        with pytest.raises(PositivityError):
            sqrt_kernel(-1.0 * identity_kernel(GRID))


class TestInverseKernel:
    def test_identity_and_scaling(self):
        assert np.allclose(inverse_kernel(identity_kernel(GRID)).matrix,
                           np.eye(3 * GRID.n_points))
        rho = inverse_kernel(4.0 * identity_kernel(GRID))
        assert np.allclose(rho.matrix, 0.25 * np.eye(rho.dim))

    def test_random_spd(self):
        sigma = _random_hermitian_psd(GRID, np.random.default_rng(2))
        sigma = sigma + 0.1 * identity_kernel(GRID)  # bound away from zero
        rho = inverse_kernel(sigma)
        res = np.linalg.norm(rho.matrix @ sigma.matrix - np.eye(rho.dim))
        assert res <= 1e-10 * np.sqrt(rho.dim)
        assert rho.hermiticity_defect() <= 1e-12

    def test_ill_conditioned(self):
        vals = np.full(GRID.n_points, 1.0)
        vals[0] = 1e-14
        with pytest.raises(IllConditionedError):
            inverse_kernel(from_local_scalar(GRID, vals))


class TestGauges:
    def _sigma_and_k(self, seed=3):
        rng = np.random.default_rng(seed)
        sp, ga = 0.7 + rng.random(), 0.4 + rng.random()
        sigma = inhomogeneous_sigma(sp, ga, GRID)
        return sp, ga, sigma, sqrt_kernel(sigma)

    def test_identity_and_sign_gauges(self):
        _, _, sigma, k = self._sigma_and_k()
        assert np.allclose(gauge_transform(k, identity_kernel(GRID)).matrix,
                           k.matrix)
        minus = gauge_transform(k, -1.0 * identity_kernel(GRID))
        assert np.allclose(minus.matrix, -k.matrix)
        assert sqrt_defect(minus, sigma) <= 1e-10

    def test_curl_gauge_matches_direct_assembly(self):
        sp, ga, sigma, k = self._sigma_and_k()
        kmag2 = np.einsum("ij,ij->i", GRID.kvecs, GRID.kvecs)
        v = from_symbol(GRID, curl_gauge_V(
            np.full(GRID.n_points, sp), sp + ga * kmag2, GRID.kvecs))
        k_curl = gauge_transform(k, v)
        ref = homogeneous_curl_K(sp, ga, GRID)
        assert np.allclose(k_curl.matrix, ref.matrix, atol=1e-11)
        assert k_curl.hermiticity_defect() > 1e-3   # necessarily non-Hermitian
        assert sqrt_defect(k_curl, sigma) <= 1e-10

    def test_gauge_invariance_of_the_defect(self):
        _, _, sigma, k = self._sigma_and_k()
        base = sqrt_defect(k, sigma)
        rng = np.random.default_rng(4)
        herm = _random_hermitian_psd(GRID, rng).matrix
        herm = (herm + herm.conj().T) / 2
        v = DiscreteKernel(GRID, scipy.linalg.expm(1j * herm))
        assert abs(sqrt_defect(gauge_transform(k, v), sigma) - base) <= 1e-12

    def test_sign_flip_gauges_preserve_hermiticity(self):
        _, _, sigma, k = self._sigma_and_k()
        dec = eigendecompose(sigma)
        rng = np.random.default_rng(5)
        flips = rng.random(dec.eigenvalues.shape) < 0.5
        k2 = gauge_transform(k, sign_flip_gauge(dec, flips))
        assert k2.hermiticity_defect() <= 1e-10
        assert sqrt_defect(k2, sigma) <= 1e-10

    def test_non_unitary_rejected(self):
        _, _, _, k = self._sigma_and_k()
        with pytest.raises(ContractError):
            gauge_transform(k, 2.0 * identity_kernel(GRID))


class TestHelmholtzProjectors:
    def test_family_defect(self):
        assert helmholtz_projectors(GRID).max_defect() <= 1e-12

    def _plane_wave_fields(self):
        """A gradient (longitudinal) and a curl (transverse) field as flat
        3N vectors in the weighted representation."""
        k = GRID.mode_kvecs[7]
        phase = np.exp(1j * GRID.points @ k)
        grad = (phase[:, None] * (1j * k)[None, :]).ravel()
        e_perp = np.cross(k, [0.0, 0.0, 1.0])
        if np.linalg.norm(e_perp) < 1e-12:
            e_perp = np.cross(k, [0.0, 1.0, 0.0])
        curl = (phase[:, None] * e_perp[None, :]).ravel()
        return grad, curl

    def test_gradient_annihilated_by_transverse(self):
        grad, _ = self._plane_wave_fields()
        p_par, p_perp = helmholtz_projectors(GRID)
        assert np.linalg.norm(p_perp.matrix @ grad) <= 1e-11 * np.linalg.norm(grad)
        assert np.allclose(p_par.matrix @ grad, grad, atol=1e-11)

    def test_curl_annihilated_by_longitudinal(self):
        _, curl = self._plane_wave_fields()
        p_par, p_perp = helmholtz_projectors(GRID)
        assert np.linalg.norm(p_par.matrix @ curl) <= 1e-11 * np.linalg.norm(curl)
        assert np.allclose(p_perp.matrix @ curl, curl, atol=1e-11)

    def test_completeness_on_random_field(self):
        rng = np.random.default_rng(6)
        f = rng.normal(size=3 * GRID.n_points) + 1j * rng.normal(
            size=3 * GRID.n_points)
        p_par, p_perp = helmholtz_projectors(GRID)
        assert np.allclose(p_par.matrix @ f + p_perp.matrix @ f, f, atol=1e-12)

    def test_commutation_with_homogeneous_kernels(self):
        model = hydrodynamic_model(1.3, 0.3, 0.4)
        sigma = model.sigma_kernel(GRID, 1.1)
        k = sqrt_kernel(sigma)
        for p in helmholtz_projectors(GRID):
            for a in (sigma, k):
                comm = p.matrix @ a.matrix - a.matrix @ p.matrix
                assert np.linalg.norm(comm) <= 1e-11 * a.norm()


class TestPrincipalAxisProjectors:
    def _model(self, values):
        def eigenvalues(points, omega):
            return np.tile(np.asarray(values, dtype=complex),
                           (points.shape[0], 1))
        return LocalAnisotropic(eigenvalues=eigenvalues)

    def test_isotropic_single_projector(self):
        fam = principal_axis_projectors(self._model([1.5, 1.5, 1.5]), 1.0, GRID)
        assert len(fam) == 1
        assert np.allclose(fam[0].matrix, np.eye(3 * GRID.n_points), atol=1e-12)

    def test_uniaxial_ranks(self):
        fam = principal_axis_projectors(self._model([2.0, 1.0, 1.0]), 1.0, GRID)
        assert len(fam) == 2
        ranks = sorted(round(np.trace(p.matrix).real) for p in fam)
        assert ranks == [GRID.n_points, 2 * GRID.n_points]

    def test_fully_anisotropic(self):
        fam = principal_axis_projectors(self._model([3.0, 2.0, 1.0]), 1.0, GRID)
        assert len(fam) == 3
        assert fam.max_defect() <= 1e-12

    def test_near_degeneracy_warns(self):
        with pytest.warns(UserWarning):
            principal_axis_projectors(
                self._model([1.0, 1.0 + 1e-10, 2.0]), 1.0, GRID)


class TestPerturbative:
    def test_zero_perturbation_is_exact_curl_kernel(self):
        sp0, ga0 = 1.0, 0.8
        k = perturbative_K(sp0, ga0, (sp0, ga0), GRID)
        ref = homogeneous_curl_K(sp0, ga0, GRID)
        assert np.allclose(k.matrix, ref.matrix, atol=1e-12)

    def test_yukawa_closed_form(self):
        assert yukawa_m0(1.0, 1.0) == pytest.approx(-np.exp(-1.0) / (4 * np.pi),
                                                    rel=1e-12)
        with pytest.raises(ModelValidityError):
            yukawa_m0(0.0, 1.0)
        with pytest.raises(ModelValidityError):
            yukawa_m0(1.0, -1.0)

    def test_quadratic_scaling(self):
        x = GRID.points[:, 0]
        prof = np.sin(2 * np.pi * x / GRID.lengths[0])
        ratios = []
        for eps in (0.2, 0.1, 0.05):
            sp = 1.0 + eps * prof
            ga = 0.8 - 0.5 * eps * prof
            sigma = inhomogeneous_sigma(sp, ga, GRID)
            k = perturbative_K(sp, ga, (1.0, 0.8), GRID)
            ratios.append(sqrt_defect(k, sigma))
        assert 0.2 <= ratios[1] / ratios[0] <= 0.35
        assert 0.2 <= ratios[2] / ratios[1] <= 0.35

    def test_invalid_background(self):
        with pytest.raises(ModelValidityError):
            perturbative_K(1.0, 0.8, (1.0, 0.0), GRID)


class TestNaiveKernel:
    def test_constant_coefficients_are_exact(self):
        sigma = inhomogeneous_sigma(1.2, 0.6, GRID)
        k = naive_inhomogeneous_K(1.2, 0.6, GRID)
        assert sqrt_defect(k, sigma) <= 1e-10
        assert np.allclose(k.matrix, homogeneous_curl_K(1.2, 0.6, GRID).matrix,
                           atol=1e-12)

    def test_linearly_varying_gamma_fails(self):
        x = GRID.points[:, 0]
        sp = np.full(GRID.n_points, 1.0)
        ga = 0.6 + 0.2 * x / GRID.lengths[0]
        sigma = inhomogeneous_sigma(sp, ga, GRID)
        naive = sqrt_defect(naive_inhomogeneous_K(sp, ga, GRID), sigma)
        assert naive > 1e-3
        pert = sqrt_defect(perturbative_K(sp, ga, (1.0, 0.7), GRID), sigma)
        assert naive >= 10 * pert

    def test_varying_sigma_only_also_fails(self):
        x = GRID.points[:, 0]
        sp = 1.0 + 0.3 * np.sin(2 * np.pi * x / GRID.lengths[0])
        ga = np.full(GRID.n_points, 0.6)
        sigma = inhomogeneous_sigma(sp, ga, GRID)
        assert sqrt_defect(naive_inhomogeneous_K(sp, ga, GRID), sigma) > 1e-6


@given(seed=st.integers(0, 10_000), scale=st.floats(0.1, 10.0))
@settings(max_examples=30, deadline=None)
def test_sqrt_contract_property(seed, scale):
    """For every Hermitian positive kernel, the square root reproduces it."""
    grid = PeriodicGrid((2, 2, 1))
    sigma = _random_hermitian_psd(grid, np.random.default_rng(seed), scale)
    k = sqrt_kernel(sigma)
    assert sqrt_defect(k, sigma) <= 1e-10
    assert k.hermiticity_defect() <= 1e-10


@given(seed=st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_model_sigma_sqrt_property(seed):
    """Square-root contract for dissipation kernels of built-in models."""
    rng = np.random.default_rng(seed)
    grid = PeriodicGrid((2, 2, 2))
    model = magnetodielectric_homogeneous_model(
        DrudeLorentzParams(0.5 + rng.random(), 0.1 + 0.5 * rng.random(),
                           rng.random()),
        DrudeLorentzParams(0.3 + 0.5 * rng.random(), 0.2 + 0.5 * rng.random(),
                           1.0 + rng.random()),
    )
    omega = 0.5 + rng.random()
    sigma = model.sigma_kernel(grid, omega)
    assert sqrt_defect(sqrt_kernel(sigma), sigma) <= 1e-10
