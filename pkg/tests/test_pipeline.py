import numpy as np
import pytest
from numpy.testing import assert_allclose

from diagnostics.conserved import total_mass
from diagnostics.errors import error_metrics, observed_orders
from gpc.galerkin import statistics_from_state
from lattice.errors import GridMismatch, InvalidTimeStep
from lattice.grid import make_grid
from lattice.potentials import harmonic_noise
from lattice.wavefield import initial_gaussian
from pipelines.bdsg_pipeline import (
    RunSpec,
    bdsg_step,
    build_bdsg_pipeline,
    first_order_step,
    initial_state,
    run,
)
from splitting.bloch_step import run_bloch


def make_spec(**overrides):
    params = dict(
        grid=make_grid(0.25, 16),
        lattice="mathieu",
        random="harmonic_noise",
        final_time=0.25,
        dt=0.05,
        Q=2,
    )
    params.update(overrides)
    return RunSpec(**params)


def final_statistics(spec, integrator):
    return statistics_from_state(run(spec, initial_state(spec), integrator).final)


@pytest.mark.parametrize("final_time, dt", [(1.0, 0.3), (1.0, 0.0), (1.0, -0.1), (-1.0, 0.1)])
def test_invalid_time_steps(final_time, dt):
    with pytest.raises(InvalidTimeStep):
        make_spec(final_time=final_time, dt=dt)


def test_step_count_tolerates_rounding():
    assert make_spec(final_time=0.22, dt=0.0025).n_steps == 88


def test_unknown_splitting():
    with pytest.raises(ValueError):
        make_spec(splitting="leapfrog")


def test_zero_order_reduces_to_deterministic_bloch():
    spec = make_spec(Q=0)
    integrator = build_bdsg_pipeline(spec)
    final = run(spec, initial_state(spec), integrator).final

    # harmonic noise is linear in z, so its mean is U(x, 0)
    psi0 = initial_gaussian(spec.grid)
    U0 = harmonic_noise()(spec.grid.x, 0.0)
    expected = run_bloch(psi0, integrator.table, U0, spec.final_time, spec.dt)

    assert_allclose(final.coeffs[0], expected.values, atol=1e-12)


def test_mass_is_conserved():
    spec = make_spec(final_time=1.0, dt=0.01, Q=3, snapshot_every=10)
    trajectory = run(spec, initial_state(spec))
    masses = np.array([total_mass(s) for s in trajectory.states])
    assert np.max(np.abs(masses / masses[0] - 1.0)) < 1e-9


def test_step_runs_backwards():
    spec = make_spec()
    integrator = build_bdsg_pipeline(spec)
    state = initial_state(spec)

    forward = bdsg_step(state, integrator.table, integrator.coupling, 0.05, 0.25)
    back = bdsg_step(forward, integrator.table, integrator.coupling, -0.05, 0.25)
    assert_allclose(back.coeffs, state.coeffs, atol=1e-9)


def test_lie_orderings_are_adjoint():
    spec = make_spec()
    integrator = build_bdsg_pipeline(spec)
    state = initial_state(spec)
    table, coupling = integrator.table, integrator.coupling

    forward = first_order_step(state, table, coupling, 0.05, 0.25)
    back = first_order_step(forward, table, coupling, -0.05, 0.25, reverse=True)
    assert_allclose(back.coeffs, state.coeffs, atol=1e-9)


def test_strang_step_is_two_adjoint_half_steps():
    spec = make_spec()
    integrator = build_bdsg_pipeline(spec)
    state = initial_state(spec)
    table, coupling = integrator.table, integrator.coupling

    half = first_order_step(state, table, coupling, 0.025, 0.25, reverse=True)
    composed = first_order_step(half, table, coupling, 0.025, 0.25)
    strang = bdsg_step(state, table, coupling, 0.05, 0.25)
    assert_allclose(composed.coeffs, strang.coeffs, atol=1e-10)

    # the other order puts both random-potential substeps in the middle
    half = first_order_step(state, table, coupling, 0.025, 0.25)
    swapped = first_order_step(half, table, coupling, 0.025, 0.25, reverse=True)
    assert np.max(np.abs(swapped.coeffs - strang.coeffs)) > 1e-6


def test_snapshot_times():
    spec = make_spec(final_time=0.5, dt=0.1, snapshot_every=2)
    trajectory = run(spec, initial_state(spec))
    assert_allclose(trajectory.times, [0.0, 0.2, 0.4, 0.5])
    assert len(trajectory.states) == 4


def test_snapshots_are_copies():
    spec = make_spec(snapshot_every=1)
    trajectory = run(spec, initial_state(spec))
    assert not np.shares_memory(trajectory.states[0].coeffs, trajectory.states[1].coeffs)
    assert not np.allclose(trajectory.states[0].coeffs, trajectory.states[-1].coeffs)


def test_initial_state_must_match_the_grid():
    spec = make_spec()
    other = make_spec(grid=make_grid(0.25, 8))
    with pytest.raises(GridMismatch):
        run(spec, initial_state(other))


def test_band_cache_is_used(tmp_path):
    spec = make_spec()
    build_bdsg_pipeline(spec, cache_dir=tmp_path)
    assert len(list(tmp_path.glob("bands_mathieu_*.bin"))) == 1


def test_strang_is_second_order():
    reference_spec = make_spec(dt=0.25 / 160)
    integrator = build_bdsg_pipeline(reference_spec)
    reference = final_statistics(reference_spec, integrator)

    levels = [0.05, 0.025, 0.0125]
    errors = [error_metrics(final_statistics(make_spec(dt=dt), integrator), reference).mean for dt in levels]
    orders = observed_orders(levels, errors)

    assert np.all(orders[1:] > 1.7)
    assert np.all(orders[1:] < 2.4)


def test_first_order_splitting_is_less_accurate():
    reference_spec = make_spec(dt=0.25 / 160)
    integrator = build_bdsg_pipeline(reference_spec)
    reference = final_statistics(reference_spec, integrator)

    strang = error_metrics(final_statistics(make_spec(dt=0.025), integrator), reference).mean
    lie = error_metrics(final_statistics(make_spec(dt=0.025, splitting="first-order"), integrator), reference).mean
    assert lie > 2 * strang
