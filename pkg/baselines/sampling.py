"""
sampling.py

Non-intrusive baselines: run a deterministic solver per value of the
random input z and combine the realizations.

- monte_carlo            : K seeded uniform draws, sample means (TS-MC)
- stochastic_collocation : Gauss-Legendre nodes, quadrature means and a
                           Lagrange interpolant in z (TS-SC); the node
                           realizations are returned with the weights

A "solver" is any callable (U, z) -> WaveField at the final time.
time_splitting_solver and bloch_solver build the two used here.

Realizations run through joblib in fixed-size batches; partial sums come
back in submission order and are reduced in that order, so results do
not depend on n_jobs.
"""

import logging
from typing import Callable

import numpy as np
from joblib import Parallel, delayed
from scipy.interpolate import BarycentricInterpolator
from tqdm import tqdm

from bloch.band_table import LatticeTable
from gpc.legendre import gauss_legendre
from lattice.grid import Grid
from lattice.potentials import PeriodicPotential, RandomPotential
from lattice.wavefield import Statistics, WaveField
from splitting.bloch_step import run_bloch
from splitting.time_splitting import run_time_splitting, total_potential


logger = logging.getLogger(__name__)

Solver = Callable[[RandomPotential, float], WaveField]


def time_splitting_solver(
    grid: Grid, V: PeriodicPotential, psi0: WaveField, final_time: float, dt: float
) -> Solver:
    """TS realization solver on `grid` for the lattice potential V."""

    def solve(U: RandomPotential, z: float) -> WaveField:
        V_total = total_potential(grid, V, U, z)
        return run_time_splitting(psi0, V_total, final_time, dt, grid.epsilon)

    return solve


def bloch_solver(table: LatticeTable, psi0: WaveField, final_time: float, dt: float) -> Solver:
    """BD realization solver; the lattice potential is already in `table`."""

    def solve(U: RandomPotential, z: float) -> WaveField:
        return run_bloch(psi0, table, U(table.grid.x, z), final_time, dt)

    return solve


def draw_inputs(K: int, seed: int) -> np.ndarray:
    """K values of z ~ U[-1, 1] from a counter-based generator."""
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.uniform(-1.0, 1.0, size=K)


def _realizations(solver: Solver, U: RandomPotential, zs: np.ndarray) -> np.ndarray:
    return np.stack([solver(U, float(z)).values for z in zs])


def _batch_sums(solver: Solver, U: RandomPotential, zs: np.ndarray):
    psi = _realizations(solver, U, zs)
    return psi.sum(axis=0), (np.abs(psi) ** 2).sum(axis=0)


def monte_carlo(
    solver: Solver,
    U: RandomPotential,
    K: int,
    seed: int,
    grid: Grid,
    n_jobs: int = 1,
    batch_size: int = 64,
    progress: bool = False,
) -> Statistics:
    """
    Sample means of psi and |psi|^2 over K seeded draws of z.

    Parameters
    ----------
    solver : callable
        (U, z) -> WaveField.
    U : RandomPotential
    K : int
        Number of realizations, >= 1.
    seed : int
        Seed of the Philox generator; the same seed gives the same draws.
    grid : Grid
        Grid the solver returns its fields on.
    n_jobs, batch_size : int
        joblib workers and realizations per task.
    """
    if K < 1:
        raise ValueError(f"Monte Carlo needs K >= 1, got {K}")

    zs = draw_inputs(K, seed)
    batches = [zs[i:i + batch_size] for i in range(0, K, batch_size)]
    logger.info("Monte Carlo: K=%d, seed=%d, %d batches", K, seed, len(batches))

    results = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_batch_sums)(solver, U, batch)
        for batch in tqdm(batches, desc="TS-MC", disable=not progress)
    )

    sum_psi = np.zeros(grid.shape, dtype=complex)
    sum_density = np.zeros(grid.shape)
    for batch_psi, batch_density in results:
        sum_psi += batch_psi
        sum_density += batch_density

    return Statistics(grid=grid, mean_field=sum_psi / K, mean_density=sum_density / K)


def stochastic_collocation(
    solver: Solver,
    U: RandomPotential,
    n_nodes: int,
    grid: Grid,
    n_jobs: int = 1,
    progress: bool = False,
) -> Statistics:
    """
    Quadrature means over Gauss-Legendre nodes plus a Lagrange interpolant.

    E[f] = sum_j w_j f(z_j) with the weights normalized for dz/2; the
    returned interpolant maps z to psi(., z) through the barycentric
    formula on the same nodes. The node realizations and weights are
    kept so the moments can be recomputed on another grid.
    """
    if n_nodes < 1:
        raise ValueError(f"collocation needs n_nodes >= 1, got {n_nodes}")

    nodes, weights = gauss_legendre(n_nodes)
    logger.info("Stochastic collocation: %d nodes", n_nodes)

    psi = np.stack(
        Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_single)(solver, U, float(z))
            for z in tqdm(nodes, desc="TS-SC", disable=not progress)
        )
    )

    mean_field = np.tensordot(weights, psi, axes=(0, 0))
    mean_density = np.tensordot(weights, np.abs(psi) ** 2, axes=(0, 0))

    interpolant = _collocation_interpolant(nodes, psi)
    return Statistics(
        grid=grid,
        mean_field=mean_field,
        mean_density=mean_density,
        interpolant=interpolant,
        realizations=psi,
        weights=weights,
    )


def _single(solver: Solver, U: RandomPotential, z: float) -> np.ndarray:
    return solver(U, z).values


def _collocation_interpolant(nodes: np.ndarray, psi: np.ndarray) -> Callable[[float], np.ndarray]:
    shape = psi.shape[1:]
    flat = psi.reshape(len(nodes), -1)
    lagrange = BarycentricInterpolator(nodes, flat)

    def interpolate(z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.asarray(lagrange(z.reshape(-1))).reshape(z.shape + shape)

    return interpolate
