"""
bdsg_pipeline.py

This module defines the Bloch-decomposition stochastic Galerkin (BD-SG)
integrator.

IMPORTANT:
- This file DOES NOT read scenario files
- This file DOES NOT write outputs

Its responsibility is to define:
    lattice table + Galerkin coupling + Strang composition
as one reusable integrator, and to run it for a RunSpec.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from bloch.band_cache import load_or_compute_lattice_table
from bloch.band_table import LatticeTable
from gpc.galerkin import (
    CouplingSet,
    GpcState,
    build_coupling,
    project_potential,
    random_potential_step,
)
from gpc.legendre import GpcBasis, triple_products
from lattice.errors import InvalidTimeStep
from lattice.grid import Grid
from lattice.potentials import lattice_potential, random_potential
from lattice.wavefield import initial_gaussian
from splitting.bloch_step import bd_lattice_step


logger = logging.getLogger(__name__)

STEP_COUNT_TOL = 1e-9
SPLITTINGS = ("strang", "first-order")


@dataclass(frozen=True)
class RunSpec:
    """
    Everything that fixes one BD-SG run.

    Parameters
    ----------
    grid : Grid
    lattice, random : str
        Potential ids, see lattice.potentials.
    final_time, dt : float
        final_time / dt must be an integer step count.
    Q : int
        gPC order, P = Q + 1 coefficient fields.
    M : int, optional
        Band count, defaults to R.
    sigma : float
        Anderson disorder magnitude.
    splitting : str
        "strang" or "first-order".
    quadrature_nodes : int, optional
        Projection rule size, defaults to 2Q + 2.
    snapshot_every : int
        Record the state every this many steps; 0 keeps only the endpoints.
    """

    grid: Grid
    lattice: str
    random: str
    final_time: float
    dt: float
    Q: int
    M: Optional[int] = None
    sigma: float = 0.0
    splitting: str = "strang"
    quadrature_nodes: Optional[int] = None
    snapshot_every: int = 0

    def __post_init__(self):
        if self.dt <= 0.0 or self.final_time < 0.0:
            raise InvalidTimeStep(f"need dt > 0 and T >= 0, got dt={self.dt}, T={self.final_time}")
        ratio = self.final_time / self.dt
        if abs(ratio - round(ratio)) > STEP_COUNT_TOL:
            raise InvalidTimeStep(f"T={self.final_time} is not a multiple of dt={self.dt}")
        if self.splitting not in SPLITTINGS:
            raise ValueError(f"splitting must be one of {SPLITTINGS}, got {self.splitting!r}")

    @property
    def epsilon(self) -> float:
        return self.grid.epsilon

    @property
    def n_steps(self) -> int:
        return int(round(self.final_time / self.dt))


@dataclass(frozen=True, eq=False)
class BdsgIntegrator:
    """Precomputed pieces of one BD-SG run; cheap to step, expensive to build."""

    table: LatticeTable
    coupling: CouplingSet
    basis: GpcBasis
    V_samples: np.ndarray = field(repr=False)
    U_hat: np.ndarray = field(repr=False)

    @property
    def grid(self) -> Grid:
        return self.table.grid

    def step(self, state: GpcState, dt: float, splitting: str = "strang") -> GpcState:
        epsilon = self.grid.epsilon
        if splitting == "strang":
            return bdsg_step(state, self.table, self.coupling, dt, epsilon)
        return first_order_step(state, self.table, self.coupling, dt, epsilon)


@dataclass
class Trajectory:
    """Snapshots (deep copies) of a run, in time order."""

    times: list[float] = field(default_factory=list)
    states: list[GpcState] = field(default_factory=list)

    def record(self, t: float, state: GpcState) -> None:
        self.times.append(float(t))
        self.states.append(state.copy())

    @property
    def final(self) -> GpcState:
        return self.states[-1]


def lattice_substep(state: GpcState, table: LatticeTable, dt: float, epsilon: float) -> GpcState:
    """The Bloch lattice step applied to all P coefficient fields at once."""
    return state.with_coeffs(bd_lattice_step(state.coeffs, table, dt, epsilon))


def bdsg_step(
    state: GpcState, table: LatticeTable, coupling: CouplingSet, dt: float, epsilon: float
) -> GpcState:
    """Strang step: random potential dt/2, lattice dt, random potential dt/2."""
    state = random_potential_step(state, coupling, 0.5 * dt, epsilon)
    state = lattice_substep(state, table, dt, epsilon)
    return random_potential_step(state, coupling, 0.5 * dt, epsilon)


def first_order_step(
    state: GpcState,
    table: LatticeTable,
    coupling: CouplingSet,
    dt: float,
    epsilon: float,
    reverse: bool = False,
) -> GpcState:
    """
    Lie step: lattice then random potential; reverse=True applies the
    random potential first (the adjoint ordering).
    """
    if reverse:
        state = random_potential_step(state, coupling, dt, epsilon)
        return lattice_substep(state, table, dt, epsilon)

    state = lattice_substep(state, table, dt, epsilon)
    return random_potential_step(state, coupling, dt, epsilon)


def build_bdsg_pipeline(spec: RunSpec, cache_dir=None, n_jobs: int = 1) -> BdsgIntegrator:
    """
    Build the integrator for a RunSpec.

    Parameters
    ----------
    spec : RunSpec
    cache_dir : str or Path, optional
        Band cache directory; None computes the table without caching.
    n_jobs : int
        joblib workers for the band eigensolves.
    """
    grid = spec.grid
    V = lattice_potential(spec.lattice)
    U = random_potential(spec.random, spec.sigma)

    # --------------------------------------------------
    # Step 1: Bloch bands of the lattice potential
    # --------------------------------------------------
    table = load_or_compute_lattice_table(V, grid, spec.M, cache_dir=cache_dir, n_jobs=n_jobs)

    # --------------------------------------------------
    # Step 2: gPC projection of U and the Galerkin coupling
    # --------------------------------------------------
    # triple products always use the exact default rule; a user-chosen
    # (possibly smaller) rule only affects the projection of U
    basis = GpcBasis(spec.Q, spec.quadrature_nodes)
    e = triple_products(GpcBasis(spec.Q))
    U_hat = project_potential(U, basis, grid)
    coupling = build_coupling(U_hat, e)

    V_samples = V(grid.x / grid.epsilon)

    logger.info(
        "BD-SG integrator ready: eps=%g, L=%d, R=%d, M=%d, Q=%d, n_q=%d",
        grid.epsilon, grid.L, grid.R, table.M, spec.Q, basis.n_nodes,
    )
    return BdsgIntegrator(table=table, coupling=coupling, basis=basis, V_samples=V_samples, U_hat=U_hat)


def initial_state(spec: RunSpec) -> GpcState:
    """The deterministic Gaussian datum as a gPC state."""
    return GpcState.deterministic(initial_gaussian(spec.grid), spec.Q + 1)


def run(
    spec: RunSpec,
    initial: GpcState,
    integrator: Optional[BdsgIntegrator] = None,
    cache_dir=None,
    n_jobs: int = 1,
) -> Trajectory:
    """
    Advance `initial` over spec.n_steps steps.

    Snapshots are taken at t = 0, every spec.snapshot_every steps, and at
    the final time.
    """
    if integrator is None:
        integrator = build_bdsg_pipeline(spec, cache_dir=cache_dir, n_jobs=n_jobs)

    integrator.grid.require_same(initial.grid)

    trajectory = Trajectory()
    trajectory.record(0.0, initial)

    state = initial
    n_steps = spec.n_steps
    for n in range(1, n_steps + 1):
        state = integrator.step(state, spec.dt, spec.splitting)
        if n == n_steps or (spec.snapshot_every and n % spec.snapshot_every == 0):
            trajectory.record(n * spec.dt, state)

    logger.info("BD-SG run finished: %d steps to T=%g", n_steps, spec.final_time)
    return trajectory
