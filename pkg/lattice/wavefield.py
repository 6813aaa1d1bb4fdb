"""
wavefield.py

Discrete wavefunctions on a Grid, the discrete L2 norm, the initial
Gaussian datum, and the Statistics container every solver reports.

Key points:
- Values are complex arrays shaped (L, R); helpers also accept any
  leading batch axes (..., L, R)
- The quadrature weight of every discrete integral is 2*pi/(L*R)
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from lattice.grid import Grid


@dataclass(frozen=True)
class WaveField:
    """One complex wavefunction psi_{l,r} on a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise ValueError(f"field shape {values.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "values", values)

    def __mul__(self, c) -> "WaveField":
        return WaveField(self.values * c, self.grid)

    __rmul__ = __mul__

    def norm(self) -> float:
        return discrete_norm(self)


def weighted_sum(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Discrete integral (2*pi/(L*R)) * sum over the last two axes."""
    return grid.dx * np.sum(values, axis=(-2, -1))


def discrete_norm(field, grid: Optional[Grid] = None) -> float:
    """
    sqrt((2*pi/(L*R)) * sum |psi|^2).

    Parameters
    ----------
    field : WaveField or ndarray
        Wavefunction; a bare array needs `grid`.
    grid : Grid, optional
    """
    if isinstance(field, WaveField):
        values, grid = field.values, field.grid
    else:
        values = np.asarray(field)
    return float(np.sqrt(weighted_sum(np.abs(values) ** 2, grid)))


def initial_gaussian(grid: Grid) -> WaveField:
    """
    (10/pi)^(1/4) exp(-5 (x - pi)^2), rescaled to unit discrete mass.
    """
    values = (10.0 / np.pi) ** 0.25 * np.exp(-5.0 * (grid.x - np.pi) ** 2)
    values = values.astype(complex)
    return WaveField(values / discrete_norm(values, grid), grid)


@dataclass(frozen=True)
class Statistics:
    """
    First two moments of a random wavefunction on a grid.

    mean_field   : E[psi], complex (L, R)
    mean_density : E[|psi|^2], real (L, R)
    mean_energy  : E[H], when the producing method computed it
    interpolant  : z -> psi(., z) for methods that can reconstruct realizations
    realizations : psi(., z_j) at quadrature nodes, shaped (n, L, R), with
    weights        summing to 1; lets the moments be recomputed after a
                   linear map of every realization
    """

    grid: Grid
    mean_field: np.ndarray
    mean_density: np.ndarray
    mean_energy: Optional[float] = None
    interpolant: Optional[Callable[[float], np.ndarray]] = None
    realizations: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None


def unwrap_field(field) -> tuple[np.ndarray, Optional[Grid]]:
    """(values, grid) for a WaveField, (array, None) for anything else."""
    if isinstance(field, WaveField):
        return field.values, field.grid
    return np.asarray(field, dtype=complex), None


def rewrap_field(values: np.ndarray, grid: Optional[Grid]):
    """Inverse of unwrap_field."""
    return WaveField(values, grid) if grid is not None else values
