"""
band_table.py

Bloch band preprocessing: for every quasimomentum k_l of the grid, solve
the shifted-Hamiltonian eigenproblem and keep the M lowest bands.

Key points:
- Eigensolves are independent per k_l and run through joblib
- Band labels follow sorted eigenvalue order; no tracking across k
- Eigenvectors are unique only up to a phase (or a rotation inside a
  degenerate eigenspace); downstream steps depend only on the projector
- Exact discrete mass conservation needs M = R; smaller M is allowed for
  truncation experiments and flagged with BandTruncationWarning
- Potentials with jumps are solved with more plane waves than the grid
  holds (`resolution`); the R eigenvectors with the most weight inside
  the grid's window are truncated to it and made orthonormal again with
  the polar factor, and keep their finely resolved energies
"""

import logging
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from scipy.linalg import LinAlgError, eigh, svd

from bloch.hamiltonian import assemble_shifted_hamiltonian, fourier_indices
from lattice.errors import EigensolveFailure, InvalidResolution
from lattice.grid import Grid
from lattice.potentials import PeriodicPotential


logger = logging.getLogger(__name__)

OVERSAMPLING = 8
MAX_RESOLUTION = 512


class BandTruncationWarning(UserWarning):
    """Fewer bands than plane waves: the lattice step no longer conserves mass exactly."""


def default_resolution(V: PeriodicPotential, R: int) -> int:
    """Plane waves used for the eigensolve: R for smooth potentials, more for potentials with jumps."""
    if V.smooth:
        return R
    return max(R, min(OVERSAMPLING * R, MAX_RESOLUTION))


@dataclass(frozen=True, eq=False)
class LatticeTable:
    """
    Precomputed bands and Bloch-function Fourier coefficients.

    energies : (M, L) real, E_m(k_l), ascending in m for each l
    chi_hat  : (L, R, M) complex, chi_hat[l, :, m] is the orthonormal
               coefficient vector of band m at k_l over lambda = -R/2..R/2-1
    resolution : plane waves of the eigensolve, None when it was R
    """

    grid: Grid
    potential_name: str
    energies: np.ndarray = field(repr=False)
    chi_hat: np.ndarray = field(repr=False)
    resolution: Optional[int] = None

    @property
    def M(self) -> int:
        return self.energies.shape[0]

    @property
    def truncated(self) -> bool:
        return self.M < self.grid.R

    @cached_property
    def bloch_functions(self) -> np.ndarray:
        """
        phi_m(y_r, k_l) = (1/sqrt(2pi)) sum_lambda chi_hat_m(lambda, k_l) exp(i (k_l + lambda) y_r),
        shaped (L, R, M).
        """
        R = self.grid.R
        # inverse DFT over lambda; ifftshift moves lambda = 0 to index 0
        periodic = R * np.fft.ifft(np.fft.ifftshift(self.chi_hat, axes=1), axis=1)
        bloch_phase = np.exp(1j * self.grid.k[:, None] * self.grid.y[None, :])
        return bloch_phase[:, :, None] * periodic / np.sqrt(2.0 * np.pi)

    def with_phases(self, phases: np.ndarray) -> "LatticeTable":
        """Copy with every eigenvector multiplied by a unit-modulus phase, phases shaped (L, M)."""
        return replace(self, chi_hat=self.chi_hat * phases[:, None, :])


def _lowest_bands(V: PeriodicPotential, k: float, R: int, M: int, resolution: int):
    H = assemble_shifted_hamiltonian(V, k, resolution)
    try:
        if resolution == R:
            return eigh(H, subset_by_index=[0, M - 1])
        energies, vectors = eigh(H)
    except LinAlgError as exc:
        raise EigensolveFailure(f"eigensolve failed at k={k}: {exc}") from exc

    offset = (resolution - R) // 2
    window = vectors[offset:offset + R]

    # stable sort keeps ties in energy order
    weight = np.sum(np.abs(window) ** 2, axis=0)
    keep = np.sort(np.argsort(-weight, kind="stable")[:R])

    U, _, Vh = svd(window[:, keep])
    return energies[keep][:M], (U @ Vh)[:, :M]


def compute_lattice_table(
    V: PeriodicPotential,
    grid: Grid,
    M: Optional[int] = None,
    n_jobs: int = 1,
    resolution: Optional[int] = None,
) -> LatticeTable:
    """
    Solve the band problem at every k_l of the grid.

    Parameters
    ----------
    V : PeriodicPotential
        Lattice potential.
    grid : Grid
        Supplies the k-points and R.
    M : int, optional
        Number of bands to keep, 1 <= M <= R; defaults to R.
    n_jobs : int
        joblib worker count for the per-k eigensolves.
    resolution : int, optional
        Plane waves of the eigensolve, even and >= R; defaults to
        default_resolution(V, R).

    Returns
    -------
    LatticeTable
    """
    R = grid.R
    M = R if M is None else int(M)
    if not 1 <= M <= R:
        raise ValueError(f"band count M must lie in [1, {R}], got {M}")

    resolution = default_resolution(V, R) if resolution is None else int(resolution)
    if resolution < R or resolution % 2 != 0:
        raise InvalidResolution(f"eigensolve resolution must be even and >= R={R}, got {resolution}")

    if M < R:
        logger.warning("Keeping %d of %d bands; mass is not conserved exactly", M, R)
        warnings.warn(
            f"M={M} < R={R}: the lattice step conserves mass exactly only when M = R",
            BandTruncationWarning,
            stacklevel=2,
        )

    logger.info(
        "Solving band problem for %s at %d k-points (R=%d, M=%d, resolution=%d)",
        V.name, grid.L, R, M, resolution,
    )

    # threads: LAPACK releases the GIL, and results come back in k order
    results = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_lowest_bands)(V, k, R, M, resolution) for k in grid.k
    )

    energies = np.stack([w for w, _ in results], axis=1)
    chi_hat = np.stack([v for _, v in results], axis=0)

    assert chi_hat.shape == (grid.L, len(fourier_indices(R)), M)

    return LatticeTable(
        grid=grid,
        potential_name=V.name,
        energies=energies,
        chi_hat=chi_hat,
        resolution=resolution if resolution != R else None,
    )
