"""
reference.py

Reference solutions for the error tables: stochastic collocation run
with a margin in every discretization parameter, cached on disk.

Margins (config section `reference`):
- time step     dt_experiment / dt_divisor
- grid spacing  dx_experiment / dx_refinement
- nodes         2 * Q_max + extra_nodes

Realization solver:
- "ts" : pseudospectral time splitting (TS-SC), for smooth lattices
- "bd" : Bloch decomposition over a band table of the refined grid, for
         lattices with jumps; sampling a jump on the grid shifts it by up
         to one grid cell, which bounds TS to first order in dx there

The reference lives on the refined grid. reference_on() projects every
node realization onto the experiment grid's Bloch window and recomputes
the moments there. Cache files share the db.array_store format and are
keyed by a hash of the full ReferenceSettings.
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from baselines.sampling import bloch_solver, stochastic_collocation, time_splitting_solver
from bloch.band_table import compute_lattice_table
from db.array_store import read_arrays, write_arrays
from diagnostics.errors import error_metrics
from lattice.errors import CacheFormatError, ScenarioError
from lattice.grid import Grid, grid_from_divisor, restrict
from lattice.potentials import lattice_potential, random_potential
from lattice.wavefield import Statistics, initial_gaussian
from splitting.bloch_step import project_to_grid


logger = logging.getLogger(__name__)

REFERENCE_SOLVERS = ("ts", "bd")


@dataclass(frozen=True)
class ReferenceSettings:
    """Physics and resolution of one reference run."""

    epsilon: float
    lattice: str
    random: str
    sigma: float
    final_time: float
    dt: float
    dx_divisor: int
    n_nodes: int
    solver: str = "ts"

    @property
    def key(self) -> str:
        canonical = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    @property
    def grid(self) -> Grid:
        return grid_from_divisor(self.epsilon, self.dx_divisor)

    def refined(self, factor: int = 2) -> "ReferenceSettings":
        """Same physics, every resolution parameter tightened by `factor`."""
        return replace(
            self,
            dt=self.dt / factor,
            dx_divisor=self.dx_divisor * factor,
            n_nodes=self.n_nodes + 2 * factor,
        )


def reference_settings(
    epsilon: float,
    lattice: str,
    random: str,
    sigma: float,
    final_time: float,
    dt: float,
    dx_divisor: int,
    Q_max: int,
    margins: dict,
) -> ReferenceSettings:
    """
    Reference settings for an experiment whose finest levels are (dt, dx_divisor, Q_max).

    margins is the `reference` section of config.yaml. The realization
    solver follows the lattice: "bd" when it has jumps, "ts" otherwise.
    """
    return ReferenceSettings(
        epsilon=float(epsilon),
        lattice=lattice,
        random=random,
        sigma=float(sigma),
        final_time=float(final_time),
        dt=float(dt) / int(margins["dt_divisor"]),
        dx_divisor=int(dx_divisor) * int(margins["dx_refinement"]),
        n_nodes=2 * int(Q_max) + int(margins["extra_nodes"]),
        solver="ts" if lattice_potential(lattice).smooth else "bd",
    )


def compute_reference(settings: ReferenceSettings, n_jobs: int = 1, progress: bool = False) -> Statistics:
    """Collocation over the settings' realization solver on the refined grid."""
    if settings.solver not in REFERENCE_SOLVERS:
        raise ScenarioError(
            f"unknown reference solver {settings.solver!r}; expected one of {list(REFERENCE_SOLVERS)}"
        )

    grid = settings.grid
    logger.info(
        "Computing reference %s (%s): dt=%g, R=%d, %d nodes",
        settings.key, settings.solver, settings.dt, grid.R, settings.n_nodes,
    )

    V = lattice_potential(settings.lattice)
    psi0 = initial_gaussian(grid)
    if settings.solver == "bd":
        table = compute_lattice_table(V, grid, n_jobs=n_jobs)
        solver = bloch_solver(table, psi0, settings.final_time, settings.dt)
    else:
        solver = time_splitting_solver(grid, V, psi0, settings.final_time, settings.dt)

    U = random_potential(settings.random, settings.sigma)
    return stochastic_collocation(solver, U, settings.n_nodes, grid, n_jobs=n_jobs, progress=progress)


def reference_path(cache_dir, settings: ReferenceSettings) -> Path:
    return Path(cache_dir) / f"reference_{settings.key}.bin"


def _cached(grid: Grid, arrays: dict) -> Statistics:
    return Statistics(
        grid=grid,
        mean_field=arrays["mean_field"],
        mean_density=arrays["mean_density"],
        realizations=arrays["realizations"],
        weights=arrays["weights"],
    )


def load_or_compute_reference(
    settings: ReferenceSettings,
    cache_dir=None,
    n_jobs: int = 1,
    progress: bool = False,
) -> Statistics:
    """Reference statistics on the refined grid, from the cache when present."""
    if cache_dir is None:
        return compute_reference(settings, n_jobs=n_jobs, progress=progress)

    path = reference_path(cache_dir, settings)
    grid = settings.grid

    if path.exists():
        header, arrays = read_arrays(path)
        if header.get("kind") != "reference" or header.get("settings") != asdict(settings):
            raise CacheFormatError(f"{path}: settings do not match key {settings.key}")
        if "realizations" not in arrays or "weights" not in arrays:
            raise CacheFormatError(f"{path}: no node realizations stored")
        logger.info("Loading reference from %s", path)
        return _cached(grid, arrays)

    stats = compute_reference(settings, n_jobs=n_jobs, progress=progress)
    arrays = {
        "mean_field": stats.mean_field,
        "mean_density": stats.mean_density,
        "realizations": stats.realizations,
        "weights": stats.weights,
    }
    write_arrays(path, {"kind": "reference", "settings": asdict(settings)}, arrays)
    logger.info("Reference cached at %s", path)
    return _cached(grid, arrays)


def reference_on(reference: Statistics, grid: Grid) -> Statistics:
    """
    Reference statistics on a coarser experiment grid.

    With node realizations each one is projected onto the grid's Bloch
    window and the moments are recomputed; bare moments fall back to
    injection at the coincident points.
    """
    if reference.realizations is None:
        return Statistics(
            grid=grid,
            mean_field=restrict(reference.mean_field, reference.grid, grid),
            mean_density=restrict(reference.mean_density, reference.grid, grid),
        )

    fields = project_to_grid(reference.realizations, reference.grid, grid)
    weights = np.asarray(reference.weights, dtype=float)
    return Statistics(
        grid=grid,
        mean_field=np.tensordot(weights, fields, axes=(0, 0)),
        mean_density=np.tensordot(weights, np.abs(fields) ** 2, axes=(0, 0)),
    )


def check_reference_stability(
    settings: ReferenceSettings,
    candidate: Statistics,
    cache_dir=None,
    n_jobs: int = 1,
    reference: Optional[Statistics] = None,
) -> dict:
    """
    Relative change of (mean error, density error) of `candidate` when the
    reference resolution is doubled in dt, dx and node count.
    """
    base = reference if reference is not None else load_or_compute_reference(settings, cache_dir, n_jobs)
    finer = load_or_compute_reference(settings.refined(2), cache_dir, n_jobs)

    e0 = error_metrics(candidate, reference_on(base, candidate.grid))
    e1 = error_metrics(candidate, reference_on(finer, candidate.grid))

    change = {
        "mean": abs(e1.mean - e0.mean) / max(e0.mean, 1e-300),
        "density": abs(e1.density - e0.density) / max(e0.density, 1e-300),
    }
    logger.info("Reference stability: %s", change)
    return change
