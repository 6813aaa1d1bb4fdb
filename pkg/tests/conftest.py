import copy

import pytest
import yaml

from bloch.band_table import compute_lattice_table
from lattice.grid import make_grid
from lattice.potentials import free_lattice, mathieu
from lattice.wavefield import initial_gaussian


SMALL_SCENARIO = {
    "name": "small",
    "description": "eps=1/4, 8 points per cell",
    "heavy": False,
    "grid": {"epsilon": 0.25, "dx_divisor": 16, "bands": None},
    "potentials": {"lattice": "mathieu", "random": "harmonic_noise", "sigma": 0.0},
    "time": {"final_time": 0.2, "dt": 0.05, "snapshot_every": 1, "splitting": "strang"},
    "gpc": {"order": 2, "quadrature_nodes": None},
    "methods": {
        "run": ["bdsg", "ts-sc", "ts-mc"],
        "mc_samples": 20,
        "mc_seed": 7,
        "sc_nodes": 4,
        "ts_dt": 0.01,
        "ts_dx_divisor": None,
    },
    "expect": {
        "source": "",
        "axis": "dt",
        "levels": [0.1, 0.05, 0.025],
        "mean": None,
        "density": None,
        "bdsg_mean": None,
        "bdsg_density": None,
        "ts_mean": None,
        "ts_density": None,
    },
}


@pytest.fixture
def grid():
    return make_grid(0.25, 16)


@pytest.fixture
def psi0(grid):
    return initial_gaussian(grid)


@pytest.fixture
def mathieu_table(grid):
    return compute_lattice_table(mathieu(), grid)


@pytest.fixture
def free_table(grid):
    return compute_lattice_table(free_lattice(), grid)


@pytest.fixture
def scenario_data():
    """Factory: a deep copy of the small scenario with per-section overrides."""

    def make(**sections):
        data = copy.deepcopy(SMALL_SCENARIO)
        for section, values in sections.items():
            if isinstance(values, dict) and isinstance(data.get(section), dict):
                data[section].update(values)
            else:
                data[section] = values
        return data

    return make


@pytest.fixture
def config(tmp_path):
    return {
        "parallel": {"n_jobs": 1, "batch_size": 8},
        "paths": {
            "band_cache": str(tmp_path / "cache" / "bands"),
            "reference_cache": str(tmp_path / "cache" / "reference"),
            "outputs": str(tmp_path / "outputs"),
        },
        "reference": {"dt_divisor": 50, "dx_refinement": 4, "extra_nodes": 5},
        "tracking": {"enabled": False, "experiment_name": "test"},
    }


@pytest.fixture
def config_file(tmp_path, config):
    path = tmp_path / "config.yaml"
    with open(path, "w") as f:
        yaml.safe_dump(config, f)
    return path
