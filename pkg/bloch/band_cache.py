"""
band_cache.py

On-disk cache of LatticeTable objects, keyed by (potential, L, R, M,
eigensolve resolution).

Band preprocessing is the only expensive setup step of a run, and the
same table serves every gPC order, time step and random potential of a
sweep, so it is computed once and reused.

Names are not unique (two custom potentials may share one), so the key
also holds a digest of what the eigensolve actually reads: the samples
V(y_r) and, when present, the exact Fourier coefficients.
"""

import hashlib
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from bloch.band_table import LatticeTable, compute_lattice_table, default_resolution
from db.array_store import read_arrays, write_arrays
from lattice.errors import CacheFormatError
from lattice.grid import Grid
from lattice.potentials import PeriodicPotential


logger = logging.getLogger(__name__)

DIGEST_LENGTH = 12


def potential_digest(V: PeriodicPotential, resolution: int) -> str:
    """sha256 over V at `resolution` cell points and its coefficients for |n| < resolution."""
    sha = hashlib.sha256()
    y = 2.0 * np.pi * np.arange(resolution) / resolution
    sha.update(np.ascontiguousarray(V(y), dtype=float).tobytes())
    if V.has_exact_coefficients:
        n = np.arange(-resolution + 1, resolution)
        sha.update(np.ascontiguousarray(V.coefficients(n)).tobytes())
    return sha.hexdigest()[:DIGEST_LENGTH]


def cache_path(
    cache_dir, V: PeriodicPotential, grid: Grid, M: int, resolution: Optional[int] = None
) -> Path:
    resolution = default_resolution(V, grid.R) if resolution is None else int(resolution)
    digest = potential_digest(V, resolution)
    return Path(cache_dir) / (
        f"bands_{V.name}_{digest}_L{grid.L}_R{grid.R}_M{M}_N{resolution}.bin"
    )


def save_lattice_table(table: LatticeTable, path, digest: Optional[str] = None) -> Path:
    header = {
        "kind": "lattice_table",
        "potential": table.potential_name,
        "digest": digest,
        "epsilon": table.grid.epsilon,
        "L": table.grid.L,
        "R": table.grid.R,
        "M": table.M,
        "resolution": table.resolution,
    }
    return write_arrays(path, header, {"energies": table.energies, "chi_hat": table.chi_hat})


def load_lattice_table(path, grid: Grid, digest: Optional[str] = None) -> LatticeTable:
    """Read a cached table and check it was built for `grid` (and for the potential with `digest`)."""
    header, arrays = read_arrays(path)

    if header.get("kind") != "lattice_table":
        raise CacheFormatError(f"{path}: not a lattice table file")
    if (header["L"], header["R"]) != (grid.L, grid.R):
        raise CacheFormatError(
            f"{path}: built for L={header['L']}, R={header['R']}, "
            f"requested L={grid.L}, R={grid.R}"
        )
    if digest is not None and header.get("digest") != digest:
        raise CacheFormatError(f"{path}: built for a different {header['potential']!r} potential")

    return LatticeTable(
        grid=grid,
        potential_name=header["potential"],
        energies=arrays["energies"],
        chi_hat=arrays["chi_hat"],
        resolution=header.get("resolution"),
    )


def load_or_compute_lattice_table(
    V: PeriodicPotential,
    grid: Grid,
    M: Optional[int] = None,
    cache_dir=None,
    n_jobs: int = 1,
    resolution: Optional[int] = None,
) -> LatticeTable:
    """
    Return the lattice table from the cache, computing and storing it on a miss.

    With cache_dir=None the table is always computed and nothing is written.
    """
    M = grid.R if M is None else int(M)
    resolution = default_resolution(V, grid.R) if resolution is None else int(resolution)

    if cache_dir is None:
        return compute_lattice_table(V, grid, M, n_jobs=n_jobs, resolution=resolution)

    path = cache_path(cache_dir, V, grid, M, resolution)
    digest = potential_digest(V, resolution)
    if path.exists():
        logger.info("Loading lattice table from %s", path)
        return load_lattice_table(path, grid, digest)

    table = compute_lattice_table(V, grid, M, n_jobs=n_jobs, resolution=resolution)
    save_lattice_table(table, path, digest)
    logger.info("Lattice table cached at %s", path)
    return table
