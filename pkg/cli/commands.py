"""
commands.py

The five CLI commands. Each one reads a Scenario, runs the solvers,
writes CSV/JSON outputs under one directory and returns a small summary
dict (used by main for the exit status and by the tests).

- bands    : lattice table (cached) + bands.csv
- run      : one method, final statistics + conserved quantities
- sweep    : convergence sweep along one axis against a reference
- compare  : every method of the scenario against one reference
- localize : second moment S(t) for a list of disorder strengths
"""

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from baselines.reference import load_or_compute_reference, reference_on, reference_settings
from baselines.sampling import monte_carlo, stochastic_collocation, time_splitting_solver
from bloch.band_cache import cache_path, load_or_compute_lattice_table
from cli.outputs import density_frame, report, write_csv, write_run_json, write_statistics
from cli.tracking import tracked_run
from diagnostics.conserved import (
    coefficient_norms,
    late_time_slope,
    second_moment,
    total_energy,
    total_mass,
)
from diagnostics.errors import error_metrics, loglog_slope, observed_orders
from gpc.galerkin import statistics_from_state
from lattice.errors import ScenarioError
from lattice.potentials import lattice_potential, random_potential
from lattice.wavefield import Statistics, initial_gaussian
from pipelines.bdsg_pipeline import BdsgIntegrator, Trajectory, build_bdsg_pipeline, initial_state, run
from scenarios.scenario import METHODS, SWEEP_AXES, Scenario, scenario_to_dict


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CommandContext:
    """Settings shared by every command: defaults file, parallelism, progress bars."""

    config: dict
    n_jobs: int = 1
    progress: bool = False

    @property
    def band_cache(self) -> str:
        return self.config["paths"]["band_cache"]

    @property
    def reference_cache(self) -> str:
        return self.config["paths"]["reference_cache"]

    def out_dir(self, command: str, scenario: Scenario, override=None) -> Path:
        if override is not None:
            return Path(override)
        return Path(self.config["paths"]["outputs"]) / command / scenario.name


# --------------------------------------------------
# Shared solver plumbing
# --------------------------------------------------
def _integrator(spec, ctx: CommandContext, cache: Optional[dict] = None) -> BdsgIntegrator:
    key = (spec.grid.R, spec.Q, spec.sigma)
    if cache is not None and key in cache:
        return cache[key]
    integrator = build_bdsg_pipeline(spec, cache_dir=ctx.band_cache, n_jobs=ctx.n_jobs)
    if cache is not None:
        cache[key] = integrator
    return integrator


def conserved_frame(trajectory: Trajectory, integrator: BdsgIntegrator) -> pd.DataFrame:
    """t, M, H, S at every snapshot."""
    epsilon = integrator.grid.epsilon
    rows = [
        {
            "t": t,
            "M": total_mass(state),
            "H": total_energy(state, integrator.V_samples, integrator.coupling, epsilon),
            "S": second_moment(state),
        }
        for t, state in zip(trajectory.times, trajectory.states)
    ]
    return pd.DataFrame(rows, columns=["t", "M", "H", "S"])


def _moments_frame(stats: Statistics, t: float) -> pd.DataFrame:
    grid = stats.grid
    mass = grid.dx * float(np.sum(stats.mean_density))
    moment = grid.dx * float(np.sum(grid.x**2 * stats.mean_density))
    return pd.DataFrame([{"t": t, "M": mass, "H": np.nan, "S": moment}], columns=["t", "M", "H", "S"])


def _sampling_statistics(
    scenario: Scenario, method: str, ctx: CommandContext, level: Optional[int] = None
) -> Statistics:
    """TS-MC or TS-SC at the scenario's TS resolution; `level` overrides K or the node count."""
    grid = scenario.ts_grid()
    solver = time_splitting_solver(
        grid,
        lattice_potential(scenario.potentials.lattice),
        initial_gaussian(grid),
        scenario.time.final_time,
        scenario.ts_dt,
    )
    U = random_potential(scenario.potentials.random, scenario.potentials.sigma)

    if method == "ts-mc":
        return monte_carlo(
            solver,
            U,
            K=int(level or scenario.methods.mc_samples),
            seed=scenario.methods.mc_seed,
            grid=grid,
            n_jobs=ctx.n_jobs,
            batch_size=int(ctx.config["parallel"]["batch_size"]),
            progress=ctx.progress,
        )
    return stochastic_collocation(
        solver, U, int(level or scenario.methods.sc_nodes), grid, n_jobs=ctx.n_jobs, progress=ctx.progress
    )


def _reference(scenario: Scenario, ctx: CommandContext, dt: float, dx_divisor: int, Q_max: int) -> Statistics:
    settings = reference_settings(
        scenario.epsilon,
        scenario.potentials.lattice,
        scenario.potentials.random,
        scenario.potentials.sigma,
        scenario.time.final_time,
        dt,
        dx_divisor,
        Q_max,
        ctx.config["reference"],
    )
    print(
        f"Loading reference solution {settings.key} "
        f"({settings.solver}, dt={settings.dt:g}, dx=pi/{settings.dx_divisor})..."
    )
    return load_or_compute_reference(settings, ctx.reference_cache, n_jobs=ctx.n_jobs, progress=ctx.progress)


def _published(scenario: Scenario, method: str) -> tuple:
    expect = scenario.expect
    if method == "bdsg":
        return expect.bdsg_mean, expect.bdsg_density
    if expect.ts_mean is not None or expect.ts_density is not None:
        return expect.ts_mean, expect.ts_density

    # sampling baselines published only as a sweep: take the row at the scenario's own level
    axis, level = ("mc-k", scenario.methods.mc_samples) if method == "ts-mc" else ("sc-n", scenario.methods.sc_nodes)
    if expect.axis == axis and level in expect.levels and expect.mean is not None:
        i = list(expect.levels).index(level)
        return expect.mean[i], expect.density[i]
    return None, None


# --------------------------------------------------
# bands
# --------------------------------------------------
def cmd_bands(scenario: Scenario, ctx: CommandContext, out_dir=None) -> dict:
    """Lattice table for the scenario grid (cached) and bands.csv with columns m, l, k, E (1-based m, l)."""
    out_dir = ctx.out_dir("bands", scenario, out_dir)
    grid = scenario.make_grid()
    V = lattice_potential(scenario.potentials.lattice)

    print("Computing lattice table...")
    table = load_or_compute_lattice_table(V, grid, scenario.grid.bands, cache_dir=ctx.band_cache, n_jobs=ctx.n_jobs)

    m, l = np.meshgrid(np.arange(table.M), np.arange(grid.L), indexing="ij")
    df = pd.DataFrame(
        {
            "m": m.ravel() + 1,
            "l": l.ravel() + 1,
            "k": grid.k[l.ravel()],
            "E": table.energies.ravel(),
        }
    )

    paths = [
        write_csv(df, out_dir / "bands.csv"),
        cache_path(ctx.band_cache, V, grid, table.M, table.resolution or grid.R),
    ]
    report(paths)
    return {"bands": df, "paths": paths}


# --------------------------------------------------
# run
# --------------------------------------------------
def cmd_run(scenario: Scenario, method: str, ctx: CommandContext, out_dir=None) -> dict:
    """One method on the scenario; writes run.json, mean_field.csv, mean_density.csv, conserved.csv."""
    if method not in METHODS:
        raise ScenarioError(f"unknown method {method!r}; expected one of {list(METHODS)}")

    out_dir = ctx.out_dir("run", scenario, out_dir)
    params = {"scenario": scenario.name, "method": method}

    with tracked_run(ctx.config["tracking"], f"run:{scenario.name}", params) as tracker:
        start = time.perf_counter()

        if method == "bdsg":
            spec = scenario.run_spec()
            print("Building BD-SG integrator...")
            integrator = _integrator(spec, ctx)
            setup_seconds = time.perf_counter() - start

            print(f"Running BD-SG: {spec.n_steps} steps, Q={spec.Q}, R={spec.grid.R}...")
            trajectory = run(spec, initial_state(spec), integrator)
            conserved = conserved_frame(trajectory, integrator)
            final_energy = float(conserved["H"].iloc[-1])
            stats = statistics_from_state(trajectory.final, mean_energy=final_energy)
        else:
            setup_seconds = 0.0
            print(f"Running {method.upper()}...")
            stats = _sampling_statistics(scenario, method, ctx)
            conserved = _moments_frame(stats, scenario.time.final_time)

        solve_seconds = time.perf_counter() - start - setup_seconds

        summary = {
            "mass_drift": float(np.max(np.abs(conserved["M"] / conserved["M"].iloc[0] - 1.0))),
            "energy_drift": float(np.max(np.abs(conserved["H"] / conserved["H"].iloc[0] - 1.0)))
            if method == "bdsg" else None,
            "mean_energy": stats.mean_energy,
        }

        paths = write_statistics(stats, out_dir)
        paths.append(write_csv(conserved, out_dir / "conserved.csv"))
        paths.append(
            write_run_json(
                out_dir / "run.json",
                {
                    "command": "run",
                    "method": method,
                    "scenario": scenario_to_dict(scenario),
                    "n_jobs": ctx.n_jobs,
                    "timings": {"setup_seconds": setup_seconds, "solve_seconds": solve_seconds},
                    "summary": summary,
                },
            )
        )

        tracker.log_metrics(summary)
        tracker.log_outputs(out_dir)

    report(paths)
    return {"statistics": stats, "conserved": conserved, "summary": summary, "paths": paths}


# --------------------------------------------------
# sweep
# --------------------------------------------------
def _finest(scenario: Scenario, axis: str, levels: list) -> tuple:
    """(dt, dx_divisor, Q_max) the reference has to beat."""
    dt, dx_divisor, Q = scenario.time.dt, scenario.grid.dx_divisor, scenario.gpc.order
    if axis == "dt":
        dt = min(levels)
    elif axis == "dx":
        dx_divisor = max(levels)
    elif axis == "gpc":
        Q = max(levels)
    else:
        dt = scenario.ts_dt
        dx_divisor = scenario.methods.ts_dx_divisor or dx_divisor
    return dt, int(dx_divisor), int(Q)


def _level_statistics(scenario: Scenario, axis: str, level, ctx: CommandContext, integrators: dict) -> Statistics:
    if axis == "mc-k":
        return _sampling_statistics(scenario, "ts-mc", ctx, level=int(level))
    if axis == "sc-n":
        return _sampling_statistics(scenario, "ts-sc", ctx, level=int(level))

    if axis == "dt":
        spec = scenario.run_spec(dt=float(level))
    elif axis == "dx":
        spec = scenario.run_spec(dx_divisor=int(level))
    else:
        spec = scenario.run_spec(Q=int(level))

    integrator = _integrator(spec, ctx, integrators)
    return statistics_from_state(run(spec, initial_state(spec), integrator).final)


def cmd_sweep(scenario: Scenario, axis: str, ctx: CommandContext, out_dir=None) -> dict:
    """
    Convergence sweep over the scenario's expect.levels along `axis`;
    writes errors.csv (level, mean_error, density_error, mean_order,
    density_order, and the published values when the scenario has them).
    """
    if axis not in SWEEP_AXES:
        raise ScenarioError(f"unknown sweep axis {axis!r}; expected one of {list(SWEEP_AXES)}")
    if scenario.expect.axis != axis or not scenario.expect.levels:
        raise ScenarioError(f"scenario {scenario.name!r} defines no levels along {axis!r}")

    out_dir = ctx.out_dir("sweep", scenario, out_dir)
    levels = list(scenario.expect.levels)
    params = {"scenario": scenario.name, "axis": axis, "levels": levels}

    with tracked_run(ctx.config["tracking"], f"sweep:{scenario.name}", params) as tracker:
        reference = _reference(scenario, ctx, *_finest(scenario, axis, levels))

        integrators = {}
        rows = []
        for level in tqdm(levels, desc=f"{axis} sweep", disable=not ctx.progress):
            stats = _level_statistics(scenario, axis, level, ctx, integrators)
            err = error_metrics(stats, reference_on(reference, stats.grid))
            rows.append({"level": level, **err.as_dict()})
            logger.info("%s=%s: mean %.3e, density %.3e", axis, level, err.mean, err.density)

        df = pd.DataFrame(rows, columns=["level", "mean_error", "density_error"])
        df["mean_order"] = observed_orders(levels, df["mean_error"], axis)
        df["density_order"] = observed_orders(levels, df["density_error"], axis)
        if scenario.expect.mean is not None:
            df["published_mean"] = list(scenario.expect.mean)
            df["published_density"] = list(scenario.expect.density)

        slopes = {
            "mean_slope": loglog_slope(levels, df["mean_error"]),
            "density_slope": loglog_slope(levels, df["density_error"]),
        }

        paths = [write_csv(df, out_dir / "errors.csv")]
        paths.append(
            write_run_json(
                out_dir / "run.json",
                {
                    "command": "sweep",
                    "axis": axis,
                    "scenario": scenario_to_dict(scenario),
                    "n_jobs": ctx.n_jobs,
                    "summary": slopes,
                },
            )
        )

        for i, row in df.iterrows():
            tracker.log_metrics(
                {"mean_error": row["mean_error"], "density_error": row["density_error"]}, step=i
            )
        tracker.log_metrics(slopes)
        tracker.log_outputs(out_dir)

    print(df.to_string(index=False))
    report(paths)
    return {"errors": df, "summary": slopes, "paths": paths}


# --------------------------------------------------
# compare
# --------------------------------------------------
def cmd_compare(scenario: Scenario, ctx: CommandContext, out_dir=None) -> dict:
    """Every method in scenario.methods.run against one reference; writes compare.csv."""
    out_dir = ctx.out_dir("compare", scenario, out_dir)
    methods = list(scenario.methods.run)
    params = {"scenario": scenario.name, "methods": ",".join(methods)}

    dt = min(scenario.time.dt, scenario.ts_dt)
    dx_divisor = max(scenario.grid.dx_divisor, scenario.methods.ts_dx_divisor or 0)
    Q_max = scenario.gpc.order

    with tracked_run(ctx.config["tracking"], f"compare:{scenario.name}", params) as tracker:
        reference = _reference(scenario, ctx, dt, dx_divisor, Q_max)

        rows = []
        for method in methods:
            print(f"Running {method.upper()}...")
            start = time.perf_counter()
            if method == "bdsg":
                spec = scenario.run_spec()
                stats = statistics_from_state(run(spec, initial_state(spec), _integrator(spec, ctx)).final)
            else:
                stats = _sampling_statistics(scenario, method, ctx)
            seconds = time.perf_counter() - start

            err = error_metrics(stats, reference_on(reference, stats.grid))
            published_mean, published_density = _published(scenario, method)
            rows.append(
                {
                    "method": method,
                    **err.as_dict(),
                    "published_mean": published_mean,
                    "published_density": published_density,
                    "seconds": seconds,
                }
            )
            tracker.log_metrics({f"{method}_mean_error": err.mean, f"{method}_density_error": err.density})

        df = pd.DataFrame(
            rows,
            columns=["method", "mean_error", "density_error", "published_mean", "published_density", "seconds"],
        )
        paths = [write_csv(df, out_dir / "compare.csv")]
        tracker.log_outputs(out_dir)

    print(df.to_string(index=False))
    report(paths)
    return {"comparison": df, "paths": paths}


# --------------------------------------------------
# localize
# --------------------------------------------------
def cmd_localize(
    scenario: Scenario,
    sigmas,
    ctx: CommandContext,
    out_dir=None,
    slope_start: Optional[float] = None,
) -> dict:
    """
    BD-SG runs of the scenario for each disorder strength sigma.

    Writes localization.csv (sigma, t, S), gpc_modes.csv (sigma, p, norm of
    the final gPC coefficient) and mean_density_sigma<sigma>.csv;
    the summary holds the least-squares slope of S over t >= slope_start
    (default: the last third of the run).
    """
    out_dir = ctx.out_dir("localize", scenario, out_dir)
    T = scenario.time.final_time
    t_start = 2.0 * T / 3.0 if slope_start is None else float(slope_start)
    params = {"scenario": scenario.name, "sigmas": ",".join(f"{s:g}" for s in sigmas)}

    with tracked_run(ctx.config["tracking"], f"localize:{scenario.name}", params) as tracker:
        rows = []
        modes = []
        slopes = {}
        final_moments = {}
        paths = []

        for sigma in tqdm(sigmas, desc="sigma", disable=not ctx.progress):
            spec = scenario.run_spec(sigma=float(sigma))
            print(f"Running BD-SG with sigma={sigma:g}...")
            trajectory = run(spec, initial_state(spec), _integrator(spec, ctx))

            moments = [second_moment(state) for state in trajectory.states]
            rows.extend({"sigma": float(sigma), "t": t, "S": s} for t, s in zip(trajectory.times, moments))

            slopes[float(sigma)] = late_time_slope(trajectory.times, moments, t_start)
            final_moments[float(sigma)] = moments[-1]
            modes.extend(
                {"sigma": float(sigma), "p": p, "norm": n} for p, n in enumerate(coefficient_norms(trajectory.final))
            )

            stats = statistics_from_state(trajectory.final)
            paths.append(
                write_csv(density_frame(stats.grid, stats.mean_density), out_dir / f"mean_density_sigma{sigma:g}.csv")
            )
            tracker.log_metrics({f"S_final_sigma{sigma:g}": moments[-1], f"S_slope_sigma{sigma:g}": slopes[float(sigma)]})

        df = pd.DataFrame(rows, columns=["sigma", "t", "S"])
        paths.insert(0, write_csv(df, out_dir / "localization.csv"))
        modes = pd.DataFrame(modes, columns=["sigma", "p", "norm"])
        paths.insert(1, write_csv(modes, out_dir / "gpc_modes.csv"))
        tracker.log_outputs(out_dir)

    report(paths)
    return {"localization": df, "modes": modes, "slopes": slopes, "final_moments": final_moments, "paths": paths}
