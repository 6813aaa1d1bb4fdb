import numpy as np
import pytest
from numpy.testing import assert_allclose

from bloch.band_cache import (
    cache_path,
    load_lattice_table,
    load_or_compute_lattice_table,
    potential_digest,
    save_lattice_table,
)
from bloch.band_table import BandTruncationWarning, compute_lattice_table, default_resolution
from bloch.hamiltonian import assemble_shifted_hamiltonian, fourier_indices, potential_block
from lattice.errors import CacheFormatError, InvalidResolution
from lattice.grid import make_grid
from lattice.potentials import PeriodicPotential, free_lattice, kronig_penney, mathieu, weak_mathieu


def test_hamiltonian_is_hermitian():
    H = assemble_shifted_hamiltonian(kronig_penney(), 0.25, 16)
    assert_allclose(H, H.conj().T, atol=1e-14)


def test_constant_potential_shifts_the_diagonal():
    V = PeriodicPotential.custom("const", lambda y: np.full_like(y, 3.0))
    H = assemble_shifted_hamiltonian(V, 0.0, 8)
    assert_allclose(H, np.diag(0.5 * fourier_indices(8) ** 2 + 3.0), atol=1e-13)


def test_free_particle_bands_are_exact(free_table, grid):
    lam = fourier_indices(grid.R)
    for l, k in enumerate(grid.k):
        expected = np.sort(0.5 * (k + lam) ** 2)
        assert_allclose(free_table.energies[:, l], expected, atol=1e-12)


def test_energies_ascend(mathieu_table):
    assert np.all(np.diff(mathieu_table.energies, axis=0) >= -1e-12)


def test_bloch_vectors_are_orthonormal(mathieu_table):
    chi = mathieu_table.chi_hat
    gram = np.einsum("lam,lan->lmn", chi.conj(), chi)
    assert_allclose(gram, np.broadcast_to(np.eye(chi.shape[-1]), gram.shape), atol=1e-8)


def test_bloch_basis_is_complete(mathieu_table):
    # (2pi/R) sum_m phi_m(y_r) conj(phi_m(y_s)) = delta_rs
    phi = mathieu_table.bloch_functions
    R = mathieu_table.grid.R
    projector = 2 * np.pi / R * np.einsum("lrm,lsm->lrs", phi, phi.conj())
    assert_allclose(projector, np.broadcast_to(np.eye(R), projector.shape), atol=1e-8)


def test_even_potential_gives_symmetric_bands(mathieu_table, grid):
    # k = -1/4 and k = +1/4 sit at indices 1 and 3 for L = 4; the plane-wave
    # window is not symmetric, so only the low bands agree
    assert grid.k[1] == -grid.k[3]
    assert_allclose(mathieu_table.energies[:4, 1], mathieu_table.energies[:4, 3], atol=1e-10)


def test_mathieu_ground_band_converges_in_R():
    coarse = compute_lattice_table(mathieu(), make_grid(0.25, 64))
    fine = compute_lattice_table(mathieu(), make_grid(0.25, 128))
    # k = 0 is index 2 for L = 4
    assert abs(coarse.energies[0, 2] - fine.energies[0, 2]) < 1e-8


def test_truncation_is_flagged(grid):
    with pytest.warns(BandTruncationWarning):
        table = compute_lattice_table(mathieu(), grid, M=4)
    assert table.truncated
    assert table.energies.shape == (4, grid.L)
    assert table.chi_hat.shape == (grid.L, grid.R, 4)


def test_band_count_out_of_range(grid):
    with pytest.raises(ValueError):
        compute_lattice_table(mathieu(), grid, M=grid.R + 1)


def test_n_jobs_does_not_change_the_table(grid):
    a = compute_lattice_table(kronig_penney(), grid, n_jobs=1)
    b = compute_lattice_table(kronig_penney(), grid, n_jobs=2)
    assert np.array_equal(a.energies, b.energies)


def test_mathieu_hamiltonian_is_tridiagonal():
    k, R = 0.25, 16
    lam = fourier_indices(R)
    H = assemble_shifted_hamiltonian(mathieu(), k, R)

    expected = np.diag(1.0 + 0.5 * (k + lam) ** 2) + 0.5 * (np.eye(R, k=1) + np.eye(R, k=-1))
    assert_allclose(H, expected, atol=1e-14)
    # no wrapped coupling between lambda = -R/2 and R/2 - 1
    assert H[0, R - 1] == 0.0


def test_barrier_block_uses_exact_coefficients():
    R = 8
    block = potential_block(kronig_penney(), R)
    assert_allclose(block[0, 0], 0.5)
    assert_allclose(block[1, 0], -1.0 / np.pi)
    assert_allclose(block[2, 0], 0.0, atol=1e-15)
    assert_allclose(block[3, 0], 1.0 / (3.0 * np.pi))
    # lambda - lambda' = -(R - 1) is not folded onto +1
    assert_allclose(block[0, R - 1], kronig_penney().coefficients(-(R - 1)))
    assert abs(block[0, R - 1] - block[1, 0]) > 0.1


def test_sampled_potential_falls_back_to_the_circulant():
    V = PeriodicPotential.custom("cos", lambda y: np.cos(y) + 1.0)
    H = assemble_shifted_hamiltonian(V, 0.0, 8)
    # the DFT of R samples wraps the cos(y) coupling around the corners
    assert_allclose(H[0, 7], 0.5, atol=1e-13)
    assert_allclose(H[1, 0], 0.5, atol=1e-13)


@pytest.mark.parametrize("R", [16, 32, 64])
def test_mathieu_low_bands_are_resolved(R):
    fine = compute_lattice_table(mathieu(), make_grid(0.25, 256))
    table = compute_lattice_table(mathieu(), make_grid(0.25, R))
    assert_allclose(table.energies[:8], fine.energies[:8], atol=1e-8)


def test_barrier_table_is_solved_at_higher_resolution(grid):
    table = compute_lattice_table(kronig_penney(), grid)
    assert table.resolution == default_resolution(kronig_penney(), grid.R) == 8 * grid.R

    chi = table.chi_hat
    gram = np.einsum("lam,lan->lmn", chi.conj(), chi)
    assert_allclose(gram, np.broadcast_to(np.eye(grid.R), gram.shape), atol=1e-10)
    assert np.all(np.diff(table.energies, axis=0) >= -1e-12)


def test_barrier_low_bands_settle_with_R():
    coarse = compute_lattice_table(kronig_penney(), make_grid(0.25, 32))
    fine = compute_lattice_table(kronig_penney(), make_grid(0.25, 64))
    assert np.max(np.abs(coarse.energies[:2] - fine.energies[:2])) < 1e-3


def test_smooth_potential_keeps_the_grid_resolution(mathieu_table, grid):
    assert default_resolution(mathieu(), grid.R) == grid.R
    assert mathieu_table.resolution is None


@pytest.mark.parametrize("resolution", [8, 33])
def test_invalid_eigensolve_resolution(grid, resolution):
    with pytest.raises(InvalidResolution):
        compute_lattice_table(kronig_penney(), grid, resolution=resolution)


def test_cache_miss_then_hit(tmp_path, grid):
    computed = load_or_compute_lattice_table(mathieu(), grid, cache_dir=tmp_path)
    path = cache_path(tmp_path, mathieu(), grid, grid.R)
    assert path.exists()
    assert path.name.startswith("bands_mathieu_")
    assert path.name.endswith(f"_L{grid.L}_R{grid.R}_M{grid.R}_N{grid.R}.bin")

    cached = load_or_compute_lattice_table(mathieu(), grid, cache_dir=tmp_path)
    assert np.array_equal(cached.energies, computed.energies)
    assert np.array_equal(cached.chi_hat, computed.chi_hat)


def test_cache_rejects_other_grid(tmp_path, grid):
    load_or_compute_lattice_table(free_lattice(), grid, cache_dir=tmp_path)
    path = cache_path(tmp_path, free_lattice(), grid, grid.R)
    with pytest.raises(CacheFormatError):
        load_lattice_table(path, make_grid(0.5, 16))


def test_cache_separates_potentials_sharing_a_name(tmp_path, grid):
    shallow = PeriodicPotential.custom("well", lambda y: 0.5 * np.cos(y))
    deep = PeriodicPotential.custom("well", lambda y: 2.0 * np.cos(y))
    assert cache_path(tmp_path, shallow, grid, grid.R) != cache_path(tmp_path, deep, grid, grid.R)

    first = load_or_compute_lattice_table(shallow, grid, cache_dir=tmp_path)
    second = load_or_compute_lattice_table(deep, grid, cache_dir=tmp_path)
    assert not np.allclose(first.energies, second.energies)
    assert len(list(tmp_path.glob("bands_well_*.bin"))) == 2


def test_cache_rejects_a_foreign_digest(tmp_path, grid):
    table = compute_lattice_table(mathieu(), grid)
    path = save_lattice_table(table, tmp_path / "bands.bin", potential_digest(mathieu(), grid.R))

    assert load_lattice_table(path, grid, potential_digest(mathieu(), grid.R)).M == grid.R
    with pytest.raises(CacheFormatError):
        load_lattice_table(path, grid, potential_digest(weak_mathieu(), grid.R))
