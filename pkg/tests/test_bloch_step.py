import numpy as np
import pytest
from numpy.testing import assert_allclose

from lattice.errors import GridMismatch
from lattice.grid import make_grid
from lattice.potentials import harmonic_noise
from lattice.wavefield import WaveField
from splitting.bloch_step import (
    analyze,
    bd_lattice_step,
    bd_split_step,
    cell_transform,
    inverse_cell_transform,
    potential_phase_step,
    project_to_grid,
    run_bloch,
)
from splitting.time_splitting import kinetic_step


def test_cell_transform_inverts(psi0):
    back = inverse_cell_transform(cell_transform(psi0), psi0.grid)
    assert isinstance(back, WaveField)
    assert_allclose(back.values, psi0.values, atol=1e-14)


def test_band_coefficients_carry_the_mass(psi0, mathieu_table):
    C = analyze(cell_transform(psi0), mathieu_table).C
    L = psi0.grid.L
    assert np.sum(np.abs(C) ** 2) / L**2 == pytest.approx(psi0.norm() ** 2, rel=1e-12)


def test_zero_step_is_identity(psi0, mathieu_table):
    out = bd_lattice_step(psi0, mathieu_table, 0.0, 0.25)
    assert_allclose(out.values, psi0.values, atol=1e-12)


def test_lattice_step_conserves_mass(psi0, mathieu_table):
    out = bd_lattice_step(psi0, mathieu_table, 0.3, 0.25)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_free_lattice_step_is_free_propagation(psi0, free_table):
    bd = bd_lattice_step(psi0, free_table, 0.1, psi0.grid.epsilon)
    exact = kinetic_step(psi0, psi0.grid, 0.1)
    assert_allclose(bd.values, exact.values, atol=1e-10)


def test_step_ignores_eigenvector_phases(psi0, mathieu_table):
    rng = np.random.default_rng(3)
    phases = np.exp(2j * np.pi * rng.random((psi0.grid.L, mathieu_table.M)))
    rotated = mathieu_table.with_phases(phases)

    a = bd_lattice_step(psi0, mathieu_table, 0.05, 0.25)
    b = bd_lattice_step(psi0, rotated, 0.05, 0.25)
    assert_allclose(a.values, b.values, atol=1e-12)


def test_leading_axes_evolve_independently(psi0, mathieu_table):
    stack = np.stack([psi0.values, 2j * psi0.values])
    out = bd_lattice_step(stack, mathieu_table, 0.05, 0.25)
    single = bd_lattice_step(psi0, mathieu_table, 0.05, 0.25)

    assert out.shape == stack.shape
    assert_allclose(out[0], single.values, atol=1e-14)
    assert_allclose(out[1], 2j * single.values, atol=1e-14)


def test_strang_step_runs_backwards(psi0, mathieu_table):
    U = harmonic_noise()(psi0.grid.x, 0.4)
    forward = bd_split_step(psi0, mathieu_table, U, 0.02, 0.25)
    back = bd_split_step(forward, mathieu_table, U, -0.02, 0.25)
    assert_allclose(back.values, psi0.values, atol=1e-9)


def test_potential_phase_is_pointwise(psi0):
    U = np.full(psi0.grid.shape, 2.0)
    out = potential_phase_step(psi0, U, 0.1, 0.25)
    assert_allclose(out.values, psi0.values * np.exp(-0.8j))


def test_unknown_splitting(psi0, mathieu_table):
    with pytest.raises(ValueError):
        bd_split_step(psi0, mathieu_table, np.zeros(psi0.grid.shape), 0.1, 0.25, splitting="yoshida")


def test_table_and_field_grids_must_match(mathieu_table):
    other = make_grid(0.25, 8)
    with pytest.raises(GridMismatch):
        bd_lattice_step(WaveField(np.ones(other.shape), other), mathieu_table, 0.1, 0.25)
    with pytest.raises(GridMismatch):
        analyze(np.ones(other.shape), mathieu_table)


def test_run_bloch_without_external_potential(psi0, free_table):
    U = np.zeros(psi0.grid.shape)
    out = run_bloch(psi0, free_table, U, 0.5, 0.1)
    exact = kinetic_step(psi0, psi0.grid, 0.5)
    assert_allclose(out.values, exact.values, atol=1e-10)


def test_projection_onto_the_same_grid_is_the_identity(grid, psi0):
    assert_allclose(project_to_grid(psi0.values, grid, grid), psi0.values, atol=1e-12)


@pytest.mark.parametrize("j", [3, -5, -18])
def test_projection_keeps_plane_waves_inside_the_window(j):
    fine, coarse = make_grid(0.25, 16), make_grid(0.25, 8)
    projected = project_to_grid(np.exp(1j * j * fine.x), fine, coarse)
    assert_allclose(projected, np.exp(1j * j * coarse.x), atol=1e-12)


def test_projection_drops_plane_waves_outside_the_window():
    fine, coarse = make_grid(0.25, 16), make_grid(0.25, 8)
    # j * eps = 6 sits at k = 0, lambda = 6: resolved by R = 16, not by R = 8
    projected = project_to_grid(np.exp(24j * fine.x), fine, coarse)
    assert_allclose(projected, 0.0, atol=1e-12)


def test_projection_batches_over_leading_axes(grid, psi0):
    coarse = make_grid(0.25, 8)
    stacked = np.stack([psi0.values, 2.0 * psi0.values])
    projected = project_to_grid(stacked, grid, coarse)
    assert projected.shape == (2,) + coarse.shape
    assert_allclose(projected[1], 2.0 * projected[0], atol=1e-12)


def test_projection_rejects_incompatible_grids(grid, psi0):
    with pytest.raises(GridMismatch):
        project_to_grid(psi0.values, grid, make_grid(0.25, 32))
    with pytest.raises(GridMismatch):
        project_to_grid(psi0.values, grid, make_grid(0.5, 8))
    with pytest.raises(GridMismatch):
        project_to_grid(psi0.values[:, :8], grid, make_grid(0.25, 8))
