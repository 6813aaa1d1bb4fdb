"""
galerkin.py

Stochastic Galerkin projection of the random-potential substep.

Inserting psi(x, t, z) = sum_p psi_p(x, t) Phi_p(z) into
    i eps d_t psi = U(x, z) psi
and projecting on Phi_q gives, at every grid point, the linear system
    i eps d_t psi_vec = A_U(x) psi_vec,   a_qp(x) = sum_j U_j(x) e_jqp,
with A_U(x) real symmetric. It is time independent, so its eigenpairs
are computed once and every step applies Q diag(exp(-i lam dt/eps)) Q^T.

Coefficient index p is counted from 0 (Phi_0 = 1).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from gpc.legendre import GpcBasis, orthonormal_legendre
from lattice.errors import EigensolveFailure
from lattice.grid import Grid
from lattice.potentials import RandomPotential
from lattice.wavefield import Statistics, WaveField


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GpcState:
    """
    gPC coefficients of the wavefunction, coeffs[p] = psi_p on the grid.

    coeffs : complex (P, L, R)
    """

    coeffs: np.ndarray
    grid: Grid

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim != 3 or coeffs.shape[1:] != self.grid.shape:
            raise ValueError(
                f"coefficients shaped {coeffs.shape}, expected (P,) + {self.grid.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def P(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def deterministic(cls, field: WaveField, P: int) -> "GpcState":
        """psi_0 = field, every higher coefficient zero."""
        coeffs = np.zeros((P,) + field.grid.shape, dtype=complex)
        coeffs[0] = field.values
        return cls(coeffs, field.grid)

    def copy(self) -> "GpcState":
        return GpcState(self.coeffs.copy(), self.grid)

    def with_coeffs(self, coeffs: np.ndarray) -> "GpcState":
        return GpcState(coeffs, self.grid)

    def evaluate(self, z) -> np.ndarray:
        """psi(x, z) = sum_p psi_p(x) Phi_p(z); shaped z.shape + (L, R)."""
        phi = orthonormal_legendre(z, self.P - 1)
        return np.tensordot(phi, self.coeffs, axes=(-1, 0))


@dataclass(frozen=True, eq=False)
class CouplingSet:
    """
    Galerkin coupling of the random potential.

    e            : (P, P, P) triple products
    A            : (L, R, P, P) real symmetric A_U(x) per grid point
    eigenvalues  : (L, R, P)
    eigenvectors : (L, R, P, P), columns orthonormal
    """

    e: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def P(self) -> int:
        return self.e.shape[0]


def _project(samples: np.ndarray, basis: GpcBasis) -> np.ndarray:
    # samples along axis 0 at the basis nodes -> coefficients along axis 0
    phi = basis.vandermonde(basis.nodes)
    return np.einsum("n,n...,np->p...", basis.weights, samples, phi)


def project_potential(U: RandomPotential, basis: GpcBasis, grid: Grid) -> np.ndarray:
    """
    U_p(x) = sum_n w_n U(x, z_n) Phi_p(z_n), shaped (P, L, R).

    Exact when U is a polynomial in z of degree <= 2 n_q - 1 - Q.
    """
    z = basis.nodes[:, None, None]
    return _project(U(grid.x, z), basis)


def project_initial(
    sampler: Callable[[np.ndarray, np.ndarray], np.ndarray], basis: GpcBasis, grid: Grid
) -> GpcState:
    """gPC state of random initial data psi_in(x, z), sampler(x, z) broadcasting like a RandomPotential."""
    z = basis.nodes[:, None, None]
    samples = np.broadcast_to(sampler(grid.x, z), (basis.n_nodes,) + grid.shape)
    return GpcState(_project(samples.astype(complex), basis), grid)


def build_coupling(U_hat: np.ndarray, e: np.ndarray) -> CouplingSet:
    """
    Assemble A_U(x) at every grid point and factor it.

    Parameters
    ----------
    U_hat : np.ndarray
        (P, L, R) projected potential.
    e : np.ndarray
        (P, P, P) triple products.
    """
    P = e.shape[0]
    if U_hat.shape[0] != P:
        raise ValueError(f"potential has {U_hat.shape[0]} modes, triple products {P}")

    A = np.einsum("jlr,jqp->lrqp", U_hat, e)
    A = 0.5 * (A + np.swapaxes(A, -1, -2))

    try:
        eigenvalues, eigenvectors = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise EigensolveFailure(f"coupling matrix factorization failed: {exc}") from exc

    logger.info("Coupling set built: P=%d at %d grid points", P, A.shape[0] * A.shape[1])
    return CouplingSet(e=e, A=A, eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def random_potential_step(
    state: GpcState, coupling: CouplingSet, dt: float, epsilon: float
) -> GpcState:
    """psi_vec(x) <- Q diag(exp(-i lam dt / eps)) Q^T psi_vec(x) at every grid point."""
    Qm = coupling.eigenvectors
    v = np.moveaxis(state.coeffs, 0, -1)

    modal = np.einsum("lrqi,lrq->lri", Qm, v)
    modal *= np.exp(-1j * coupling.eigenvalues * dt / epsilon)
    v = np.einsum("lrpi,lri->lrp", Qm, modal)

    return state.with_coeffs(np.moveaxis(v, -1, 0))


def mean_field(state: GpcState) -> WaveField:
    """E[psi] = psi_0."""
    return WaveField(state.coeffs[0].copy(), state.grid)


def mean_density(state: GpcState) -> np.ndarray:
    """E[|psi|^2] = sum_p |psi_p|^2."""
    return np.sum(np.abs(state.coeffs) ** 2, axis=0)


def statistics_from_state(state: GpcState, mean_energy: Optional[float] = None) -> Statistics:
    return Statistics(
        grid=state.grid,
        mean_field=mean_field(state).values,
        mean_density=mean_density(state),
        mean_energy=mean_energy,
        interpolant=state.copy().evaluate,
    )
