"""
errors.py

Error metrics against a reference and convergence-order helpers.
"""

from dataclasses import dataclass

import numpy as np

from lattice.wavefield import Statistics, discrete_norm


@dataclass(frozen=True)
class ErrorMetrics:
    """mean = ||E[psi_ref] - E[psi]||, density = ||sqrt(E|psi_ref|^2) - sqrt(E|psi|^2)||."""

    mean: float
    density: float

    def as_dict(self) -> dict:
        return {"mean_error": self.mean, "density_error": self.density}


def error_metrics(candidate: Statistics, reference: Statistics) -> ErrorMetrics:
    """Discrete L2 distances of the first two moments; both must share a grid."""
    reference.grid.require_same(candidate.grid)
    grid = reference.grid

    mean = discrete_norm(reference.mean_field - candidate.mean_field, grid)
    density = discrete_norm(
        np.sqrt(np.maximum(reference.mean_density, 0.0))
        - np.sqrt(np.maximum(candidate.mean_density, 0.0)),
        grid,
    )
    return ErrorMetrics(mean=mean, density=density)


def _step_sizes(levels, axis: str) -> np.ndarray:
    levels = np.asarray(levels, dtype=float)
    # dt levels are step sizes; dx levels are divisors (dx = pi / n) and
    # the sampling axes are counts, both refine as the level grows
    return levels if axis == "dt" else 1.0 / levels


def observed_orders(levels, errors, axis: str = "dt") -> np.ndarray:
    """
    order_i = log(e_{i-1} / e_i) / log(h_{i-1} / h_i), NaN for the first level.

    For successive halvings this is log2 of the error ratio.
    """
    h = _step_sizes(levels, axis)
    e = np.asarray(errors, dtype=float)
    if h.shape != e.shape:
        raise ValueError(f"{len(h)} levels but {len(e)} errors")

    orders = np.full(e.shape, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        orders[1:] = np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])
    return orders


def loglog_slope(levels, errors) -> float:
    """Least-squares slope of log(error) against log(level)."""
    slope, _ = np.polyfit(np.log(np.asarray(levels, dtype=float)), np.log(np.asarray(errors, dtype=float)), 1)
    return float(slope)
