"""
time_splitting.py

Classical time-splitting spectral (TS) solver for one realization of
    i eps d_t psi = -eps^2/2 d_xx psi + (V(x/eps) + U(x, z)) psi
on the global LR-point grid of [0, 2pi].

The kinetic substep is diagonal in the global Fourier basis; the
potential substep is a pointwise phase. Unlike the BD step, the lattice
potential sits in the phase, so the time step has to resolve eps.
"""

import numpy as np

from lattice.grid import Grid
from lattice.wavefield import WaveField, rewrap_field, unwrap_field
from splitting.bloch_step import potential_phase_step


def wavenumbers(grid: Grid) -> np.ndarray:
    """Integer Fourier modes xi of the LR-point grid, FFT order."""
    return np.fft.fftfreq(grid.n_points, d=1.0 / grid.n_points)


def total_potential(grid: Grid, V, U, z) -> np.ndarray:
    """V(x/eps) + U(x, z) sampled on the grid; z may carry leading axes."""
    return V(grid.x / grid.epsilon) + U(grid.x, z)


def kinetic_step(field, grid: Grid, dt: float):
    """Multiply Fourier mode xi by exp(-i eps xi^2 dt / 2)."""
    values, wrapped_grid = unwrap_field(field)
    lead = values.shape[:-2]

    flat = values.reshape(lead + (grid.n_points,))
    xi = wavenumbers(grid)
    flat = np.fft.ifft(
        np.exp(-0.5j * grid.epsilon * xi**2 * dt) * np.fft.fft(flat, axis=-1), axis=-1
    )
    return rewrap_field(flat.reshape(values.shape), wrapped_grid)


def ts_step(field, V_total: np.ndarray, dt: float, epsilon: float, grid: Grid = None):
    """
    One Strang TS step: half potential phase, kinetic step, half potential phase.

    Parameters
    ----------
    field : WaveField or ndarray
        Shaped (..., L, R); a bare array needs `grid`.
    V_total : ndarray
        V(x/eps) + U(x, z) on the grid.
    dt, epsilon : float
    """
    if isinstance(field, WaveField):
        grid = field.grid
    if grid is None:
        raise ValueError("ts_step on a bare array needs the grid")

    field = potential_phase_step(field, V_total, 0.5 * dt, epsilon)
    field = kinetic_step(field, grid, dt)
    return potential_phase_step(field, V_total, 0.5 * dt, epsilon)


def run_time_splitting(
    psi0, V_total: np.ndarray, final_time: float, dt: float, epsilon: float, grid: Grid = None
):
    """Deterministic TS solver; returns the field at final_time."""
    n_steps = int(round(final_time / dt))
    field = psi0
    for _ in range(n_steps):
        field = ts_step(field, V_total, dt, epsilon, grid)
    return field
