"""Dense Green-solver contracts: assembly, solve, fluctuation identity."""

import numpy as np
import pytest

from nlmedia.bulk import bulk_green_k, dispersion
from nlmedia.errors import IllConditionedError
from nlmedia.grids import DiscreteKernel, PeriodicGrid, symbol_at
from nlmedia.gridsolver import (
    ContractError,
    build_H,
    schwarz_green_defect,
    solve_green,
    verify_integral_relation,
)
from nlmedia.response import (
    CellLattice,
    DrudeLorentzParams,
    drude_model,
    hydrodynamic_model,
    local_dielectric_model,
    vacuum_model,
)

GRID = PeriodicGrid((3, 3, 3))


def _khat_projectors(k):
    k = np.asarray(k, dtype=float)
    k2 = k @ k
    if k2 == 0:
        return np.zeros((3, 3)), np.eye(3)
    p_par = np.outer(k, k) / k2
    return p_par, np.eye(3) - p_par


class TestBuildH:
    def test_vacuum_symbol(self):
        w = 1.0 + 0.3j
        op = build_H(vacuum_model().q_kernel(GRID, w), w)
        for mode in (0, 4, 11):
            k = GRID.kvecs[mode]
            p_par, p_perp = _khat_projectors(k)
            expected = (k @ k - w**2) * p_perp - w**2 * p_par
            assert np.allclose(symbol_at(op.kernel, mode), expected, atol=1e-12)

    def test_local_scalar_symbol_matches_dispersion(self):
        w = 1.1
        model = local_dielectric_model(2.0 + 0.4j)
        op = build_H(model.q_kernel(GRID, w), w)
        for mode in (1, 7, 20):
            k = GRID.kvecs[mode]
            pair = dispersion(model, np.linalg.norm(k), w)
            p_par, p_perp = _khat_projectors(k)
            expected = pair.d_perp * p_perp - pair.d_par * p_par
            assert np.allclose(symbol_at(op.kernel, mode), expected, atol=1e-12)

    def test_non_reciprocal_rejected(self):
        rng = np.random.default_rng(0)
        n = 3 * GRID.n_points
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        with pytest.raises(ContractError):
            build_H(DiscreteKernel(GRID, m), 1.0)

    def test_reciprocity_structural(self):
        w = 1.1
        op = build_H(hydrodynamic_model(1.2, 0.3, 0.4).q_kernel(GRID, w), w)
        assert op.kernel.reciprocity_defect() <= 1e-12


class TestSolveGreen:
    def test_vacuum_modal_inversion(self):
        w = 1.0 + 0.4j
        sol = solve_green(build_H(vacuum_model().q_kernel(GRID, w), w))
        for mode in (0, 4, 11):
            k = GRID.kvecs[mode]
            p_par, p_perp = _khat_projectors(k)
            expected = p_perp / (k @ k - w**2) - p_par / w**2
            assert np.allclose(symbol_at(sol.green, mode), expected, atol=1e-11)

    def test_matches_bulk_green_per_mode(self):
        w = 1.1
        model = hydrodynamic_model(1.3, 0.3, 0.4)
        sol = solve_green(build_H(model.q_kernel(GRID, w), w))
        for mode in range(GRID.n_points):
            k = GRID.kvecs[mode]
            ref = bulk_green_k(model, k, w)
            assert np.allclose(symbol_at(sol.green, mode), ref, atol=1e-11)

    def test_residual_and_reciprocity(self):
        w = 0.9
        model = drude_model(DrudeLorentzParams(1.2, 0.3, 0.0))
        sol = solve_green(build_H(model.q_kernel(GRID, w), w))
        assert sol.residual <= 1e-10
        assert sol.reciprocity <= 1e-10

    def test_cell_lattice_medium(self):
        grid = PeriodicGrid((4, 2, 2))
        cells = CellLattice(
            cell_shape=(2, 2, 2),
            models=(hydrodynamic_model(1.0, 0.3, 0.4),
                    hydrodynamic_model(1.5, 0.25, 0.3)),
        )
        w = 1.1
        sol = solve_green(build_H(cells.q_kernel(grid, w), w))
        assert sol.residual <= 1e-10
        assert sol.reciprocity <= 1e-10
        assert verify_integral_relation(
            sol, cells.sigma_kernel(grid, w), w) <= 1e-9

    def test_loss_deficiency_detected(self):
        # lossless vacuum at a real frequency resonant with a grid mode
        w = 1.0
        with pytest.raises(IllConditionedError):
            solve_green(build_H(vacuum_model().q_kernel(GRID, w), w))


class TestIntegralRelation:
    @pytest.mark.parametrize("model", [
        local_dielectric_model(2.0 + 0.5j),
        drude_model(DrudeLorentzParams(1.2, 0.3, 0.0)),
        hydrodynamic_model(1.3, 0.3, 0.4),
    ], ids=["local", "drude", "hydrodynamic"])
    def test_residual(self, model):
        w = 1.1
        sol = solve_green(build_H(model.q_kernel(GRID, w), w))
        assert verify_integral_relation(
            sol, model.sigma_kernel(GRID, w), w) <= 1e-9

    def test_requires_real_frequency(self):
        w = 1.0 + 0.2j
        model = local_dielectric_model(2.0 + 0.5j)
        sol = solve_green(build_H(model.q_kernel(GRID, w), w))
        with pytest.raises(ContractError):
            verify_integral_relation(sol, model.sigma_kernel(GRID, w), w)

    def test_frequency_mismatch_rejected(self):
        model = local_dielectric_model(2.0 + 0.5j)
        sol = solve_green(build_H(model.q_kernel(GRID, 1.1), 1.1))
        with pytest.raises(ContractError):
            verify_integral_relation(sol, model.sigma_kernel(GRID, 1.0), 1.0)


def test_schwarz_reflection_of_green():
    w = 1.1 + 0.2j
    model = hydrodynamic_model(1.3, 0.3, 0.4)
    q_plus = model.q_kernel(GRID, w)
    q_minus = model.q_kernel(GRID, -np.conj(w))
    assert schwarz_green_defect(q_plus, q_minus, w) <= 1e-11
