"""
conserved.py

Quantities monitored along a BD-SG trajectory.

Key points:
- Expectations over z reduce to sums over gPC coefficients, since the
  basis is orthonormal: E[int |psi|^2] = sum_p ||psi_p||^2
- Spatial derivatives are spectral, on the global LR-point grid
- |x|^2 in the second moment uses raw coordinates on [0, 2pi]
"""

import logging

import numpy as np

from bloch.band_table import LatticeTable
from gpc.galerkin import CouplingSet, GpcState
from lattice.errors import NonRealEnergy
from lattice.grid import Grid
from splitting.bloch_step import analyze, cell_transform
from splitting.time_splitting import wavenumbers


logger = logging.getLogger(__name__)

ENERGY_IMAG_TOL = 1e-8


def total_mass(state: GpcState) -> float:
    """M = sum_p ||psi_p||^2."""
    return float(state.grid.dx * np.sum(np.abs(state.coeffs) ** 2))


def coefficient_norms(state: GpcState) -> np.ndarray:
    """||psi_p|| per gPC mode, shaped (P,); their squares sum to total_mass."""
    return np.sqrt(state.grid.dx * np.sum(np.abs(state.coeffs) ** 2, axis=(1, 2)))


def spectral_derivative(values: np.ndarray, grid: Grid) -> np.ndarray:
    """d/dx of fields shaped (..., L, R) through the global FFT."""
    lead = values.shape[:-2]
    flat = values.reshape(lead + (grid.n_points,))
    d = np.fft.ifft(1j * wavenumbers(grid) * np.fft.fft(flat, axis=-1), axis=-1)
    return d.reshape(values.shape)


def total_energy(
    state: GpcState, V_samples: np.ndarray, coupling: CouplingSet, epsilon: float
) -> float:
    """
    H = dx * sum [ eps^2/2 |d_x psi_vec|^2 + V(x/eps) |psi_vec|^2 + psi_vec^H A_U(x) psi_vec ].

    Parameters
    ----------
    state : GpcState
    V_samples : np.ndarray
        Lattice potential V(x/eps) on the grid, shaped (L, R).
    coupling : CouplingSet
        Supplies A_U(x).
    epsilon : float

    Raises
    ------
    NonRealEnergy
        If the imaginary residue exceeds 1e-8 * |H|.
    """
    grid = state.grid
    psi = state.coeffs

    kinetic = 0.5 * epsilon**2 * np.sum(np.abs(spectral_derivative(psi, grid)) ** 2)
    lattice = np.sum(V_samples * np.abs(psi) ** 2)
    random = np.einsum("qlr,lrqp,plr->", psi.conj(), coupling.A, psi)

    energy = grid.dx * (kinetic + lattice + random)

    scale = abs(energy.real)
    if abs(energy.imag) > ENERGY_IMAG_TOL * scale:
        raise NonRealEnergy(f"energy {energy!r} has a non-negligible imaginary part")
    if abs(energy.imag) > 1e-2 * ENERGY_IMAG_TOL * scale:
        logger.warning("Energy imaginary residue %.3e is close to the tolerance", energy.imag)

    return float(energy.real)


def second_moment(state: GpcState) -> float:
    """S = dx * sum |x|^2 E[|psi|^2]."""
    grid = state.grid
    density = np.sum(np.abs(state.coeffs) ** 2, axis=0)
    return float(grid.dx * np.sum(grid.x**2 * density))


def band_populations(state: GpcState, table: LatticeTable) -> np.ndarray:
    """
    Expected mass carried by each Bloch band, shaped (M,).

    With M = R the populations sum to total_mass(state).
    """
    table.grid.require_same(state.grid)
    C = analyze(cell_transform(state.coeffs), table).C
    L = state.grid.L
    return np.sum(np.abs(C) ** 2, axis=(0, 2)) / L**2


def late_time_slope(times, values, t_start: float) -> float:
    """Least-squares dS/dt over the snapshots with t >= t_start."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    window = times >= t_start - 1e-12
    if window.sum() < 2:
        raise ValueError(f"need two snapshots at t >= {t_start}, have {int(window.sum())}")
    slope, _ = np.polyfit(times[window], values[window], 1)
    return float(slope)
