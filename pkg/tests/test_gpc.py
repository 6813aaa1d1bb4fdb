import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm

from gpc.galerkin import (
    GpcState,
    build_coupling,
    mean_density,
    mean_field,
    project_initial,
    project_potential,
    random_potential_step,
    statistics_from_state,
)
from gpc.legendre import GpcBasis, gauss_legendre, orthonormal_legendre, triple_products
from lattice.potentials import RandomPotential, harmonic_noise, linear_force


def test_basis_is_orthonormal():
    basis = GpcBasis(6)
    phi = basis.vandermonde(basis.nodes)
    gram = phi.T @ (basis.weights[:, None] * phi)
    assert_allclose(gram, np.eye(7), atol=1e-12)


def test_first_basis_function_is_one():
    z = np.linspace(-1, 1, 5)
    assert_allclose(orthonormal_legendre(z, 3)[:, 0], 1.0)
    assert_allclose(GpcBasis(3).evaluate(1, z), np.sqrt(3) * z)


def test_default_rule():
    basis = GpcBasis(4)
    assert basis.n_nodes == 10
    assert basis.P == 5
    assert basis.weights.sum() == pytest.approx(1.0)


def test_expectation_over_the_rule():
    basis = GpcBasis(4)
    phi = basis.vandermonde(basis.nodes)
    assert_allclose(basis.expectation(phi), np.eye(5)[0], atol=1e-13)
    # E[z^2] = 1/3 for z uniform on [-1, 1]
    assert basis.expectation(basis.nodes**2) == pytest.approx(1.0 / 3.0)


def test_evaluate_out_of_range():
    with pytest.raises(IndexError):
        GpcBasis(2).evaluate(3, 0.0)


def test_rule_must_resolve_the_order():
    with pytest.raises(ValueError):
        GpcBasis(4, n_nodes=3)
    with pytest.raises(ValueError):
        gauss_legendre(0)


def test_triple_products_known_values():
    e = triple_products(GpcBasis(4))

    assert_allclose(e[0], np.eye(5), atol=1e-12)
    # E[Phi_1 Phi_1 Phi_2] = 3 sqrt(5) E[z^2 P_2] = 2 / sqrt(5)
    assert e[1, 1, 2] == pytest.approx(2.0 / np.sqrt(5.0), abs=1e-12)
    # parity: odd total degree vanishes
    assert e[1, 1, 1] == pytest.approx(0.0, abs=1e-12)
    # degrees violating the triangle inequality vanish
    assert e[1, 1, 4] == pytest.approx(0.0, abs=1e-12)


def test_triple_products_are_symmetric():
    e = triple_products(GpcBasis(3))
    assert_allclose(e, np.transpose(e, (1, 0, 2)), atol=1e-14)
    assert_allclose(e, np.transpose(e, (0, 2, 1)), atol=1e-14)


def test_triple_products_need_enough_nodes():
    with pytest.raises(ValueError):
        triple_products(GpcBasis(4, n_nodes=5))


def test_linear_force_projection(grid):
    U_hat = project_potential(linear_force(), GpcBasis(3), grid)

    assert U_hat.shape == (4,) + grid.shape
    assert_allclose(U_hat[0], grid.x, atol=1e-12)
    assert_allclose(U_hat[1], 0.1 * grid.x / np.sqrt(3.0), atol=1e-12)
    assert_allclose(U_hat[2:], 0.0, atol=1e-12)


def test_coupling_factorization(grid):
    basis = GpcBasis(3)
    coupling = build_coupling(project_potential(harmonic_noise(), basis, grid), triple_products(basis))

    A = coupling.A
    assert A.shape == grid.shape + (4, 4)
    assert_allclose(A, np.swapaxes(A, -1, -2), atol=1e-14)

    Qm, lam = coupling.eigenvectors, coupling.eigenvalues
    rebuilt = np.einsum("lrpi,lri,lrqi->lrpq", Qm, lam, Qm)
    assert_allclose(rebuilt, A, atol=1e-10)


def test_coupling_mode_mismatch(grid):
    with pytest.raises(ValueError):
        build_coupling(np.zeros((3,) + grid.shape), triple_products(GpcBasis(3)))


def test_random_step_matches_matrix_exponential(grid):
    basis = GpcBasis(3)
    coupling = build_coupling(project_potential(harmonic_noise(), basis, grid), triple_products(basis))

    rng = np.random.default_rng(1)
    coeffs = rng.normal(size=(4,) + grid.shape) + 1j * rng.normal(size=(4,) + grid.shape)
    state = GpcState(coeffs, grid)

    dt, epsilon = 0.03, grid.epsilon
    out = random_potential_step(state, coupling, dt, epsilon)

    for l, r in [(0, 0), (1, 5), (3, 15)]:
        expected = expm(-1j * coupling.A[l, r] * dt / epsilon) @ coeffs[:, l, r]
        assert_allclose(out.coeffs[:, l, r], expected, atol=1e-12)


def test_deterministic_potential_is_a_scalar_phase(grid, psi0):
    U = RandomPotential.custom("cos", lambda x, z, s: np.cos(x) + 0.0 * z)
    basis = GpcBasis(2)
    coupling = build_coupling(project_potential(U, basis, grid), triple_products(basis))

    state = GpcState(np.stack([psi0.values, 0.5 * psi0.values, -psi0.values]), grid)
    out = random_potential_step(state, coupling, 0.1, grid.epsilon)

    phase = np.exp(-1j * np.cos(grid.x) * 0.1 / grid.epsilon)
    assert_allclose(out.coeffs, state.coeffs * phase, atol=1e-12)


def test_state_shape_is_checked(grid):
    with pytest.raises(ValueError):
        GpcState(np.zeros(grid.shape), grid)


def test_deterministic_state(psi0):
    state = GpcState.deterministic(psi0, 4)
    assert state.P == 4
    assert_allclose(state.evaluate(0.7), psi0.values)
    assert_allclose(mean_field(state).values, psi0.values)
    assert_allclose(mean_density(state), np.abs(psi0.values) ** 2)


def test_evaluate_batches_over_z(grid, psi0):
    state = GpcState(np.stack([psi0.values, psi0.values]), grid)
    z = np.array([-1.0, 0.0, 1.0])
    values = state.evaluate(z)

    assert values.shape == (3,) + grid.shape
    assert_allclose(values[1], psi0.values)
    assert_allclose(values[2], (1 + np.sqrt(3.0)) * psi0.values)


def test_project_initial_recovers_polynomial_data(grid, psi0):
    basis = GpcBasis(2)
    state = project_initial(lambda x, z: z**2 * psi0.values, basis, grid)

    # z^2 = 1/3 Phi_0 + 2/(3 sqrt 5) Phi_2
    assert_allclose(state.coeffs[0], psi0.values / 3.0, atol=1e-14)
    assert_allclose(state.coeffs[1], 0.0, atol=1e-14)
    assert_allclose(state.coeffs[2], 2.0 / (3.0 * np.sqrt(5.0)) * psi0.values, atol=1e-14)
    assert_allclose(state.evaluate(0.5), 0.25 * psi0.values, atol=1e-14)


def test_statistics_interpolant_is_a_snapshot(psi0):
    state = GpcState.deterministic(psi0, 2)
    stats = statistics_from_state(state)
    state.coeffs[0] = 0.0
    assert_allclose(stats.interpolant(0.1), psi0.values)
