"""
hamiltonian.py

Plane-wave matrix of the shifted Hamiltonian
    H(k) = 1/2 (-i d/dy + k)^2 + V(y)
acting on 2pi-periodic functions.

Key points:
- Plane-wave indices lambda run over {-R/2, ..., R/2 - 1}
- Potentials with closed-form Fourier coefficients enter as the Galerkin
  block V_hat(lambda - lambda') over every difference -(R-1)..R-1; no
  coefficient is folded back modulo R
- Sampled-only potentials fall back to a DFT of the R samples V(y_r),
  taken modulo R, i.e. the circulant that multiplies grid values pointwise
"""

import numpy as np

from lattice.potentials import PeriodicPotential


def fourier_indices(R: int) -> np.ndarray:
    """lambda = -R/2, ..., R/2 - 1."""
    return np.arange(-(R // 2), R // 2)


def potential_fourier_coefficients(V: PeriodicPotential, R: int) -> np.ndarray:
    """V_hat[n] = (1/R) sum_r V(y_r) exp(-i n y_r), in FFT order n = 0..R-1."""
    y = 2.0 * np.pi * np.arange(R) / R
    return np.fft.fft(V(y)) / R


def potential_block(V: PeriodicPotential, R: int) -> np.ndarray:
    """R x R matrix V_hat(lambda - lambda') over the plane-wave window."""
    lam = fourier_indices(R)
    difference = lam[:, None] - lam[None, :]
    if V.has_exact_coefficients:
        return V.coefficients(difference)
    return potential_fourier_coefficients(V, R)[np.mod(difference, R)]


def assemble_shifted_hamiltonian(V: PeriodicPotential, k: float, R: int) -> np.ndarray:
    """
    Hermitian R x R matrix of H(k) in the plane-wave basis.

    Parameters
    ----------
    V : PeriodicPotential
        Lattice potential; its exact coefficients are used when it has them,
        otherwise its samples at y_r = 2*pi*(r-1)/R.
    k : float
        Quasimomentum in [-1/2, 1/2).
    R : int
        Number of plane waves (even).

    Returns
    -------
    np.ndarray
        Complex matrix H[lambda, lambda'] = 1/2 (k + lambda)^2 delta + V_hat(lambda - lambda').
    """
    lam = fourier_indices(R)

    H = np.array(potential_block(V, R), dtype=complex)
    H[np.diag_indices(R)] += 0.5 * (k + lam) ** 2

    # V_hat(-n) = conj(V_hat(n)) holds only up to rounding for sampled potentials
    return 0.5 * (H + H.conj().T)
