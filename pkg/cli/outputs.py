"""
outputs.py

Result files written by the CLI. Every CSV has a header row and a fixed
column order; floats are printed with 17 significant digits so they
re-parse to the same doubles.
"""

import json
import platform
from pathlib import Path

import numpy as np
import pandas as pd
import scipy

from lattice.grid import Grid
from lattice.wavefield import Statistics


FLOAT_FORMAT = "%.17g"


def write_csv(df: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def field_frame(grid: Grid, values: np.ndarray) -> pd.DataFrame:
    values = np.asarray(values).reshape(-1)
    return pd.DataFrame({"x": grid.flat_x, "re": values.real, "im": values.imag})


def density_frame(grid: Grid, density: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"x": grid.flat_x, "density": np.asarray(density).reshape(-1)})


def write_statistics(stats: Statistics, out_dir, suffix: str = "") -> list[Path]:
    """mean_field<suffix>.csv and mean_density<suffix>.csv."""
    out_dir = Path(out_dir)
    return [
        write_csv(field_frame(stats.grid, stats.mean_field), out_dir / f"mean_field{suffix}.csv"),
        write_csv(density_frame(stats.grid, stats.mean_density), out_dir / f"mean_density{suffix}.csv"),
    ]


def versions() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def write_run_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = dict(payload)
    document["versions"] = versions()
    with open(path, "w") as f:
        json.dump(document, f, indent=2, sort_keys=True, default=_json_default)
    return path


def report(paths) -> None:
    print("Outputs written to:")
    for path in paths:
        print(f" - {path}")
