"""
grid.py

Coupled spatial / quasimomentum discretization of [0, 2pi].

Key points:
- The domain holds exactly L = 1/epsilon lattice cells of size 2*pi*epsilon
- Each cell carries R equispaced points y_r = 2*pi*(r-1)/R
- The Brillouin zone is sampled at k_l = -1/2 + (l-1)/L
- Field arrays are indexed (l, r); row-major flattening gives the
  global uniform grid x_n = n * 2*pi/(L*R)
"""

from dataclasses import dataclass, field

import numpy as np

from lattice.errors import InvalidResolution, NonIntegerCellCount, GridMismatch


CELL_COUNT_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """
    Immutable grid description.

    Parameters
    ----------
    epsilon : float
        Semiclassical parameter in (0, 1].
    L : int
        Number of lattice cells in [0, 2pi].
    R : int
        Grid points per cell (even, >= 4).
    """

    epsilon: float
    L: int
    R: int
    k: np.ndarray = field(init=False, repr=False, compare=False)
    y: np.ndarray = field(init=False, repr=False, compare=False)
    x: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k = -0.5 + np.arange(self.L) / self.L
        y = 2.0 * np.pi * np.arange(self.R) / self.R
        x = self.epsilon * (2.0 * np.pi * np.arange(self.L)[:, None] + y[None, :])

        for arr in (k, y, x):
            arr.setflags(write=False)

        object.__setattr__(self, "k", k)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.L, self.R)

    @property
    def n_points(self) -> int:
        return self.L * self.R

    @property
    def dx(self) -> float:
        """Uniform spacing 2*pi/(L*R) of the global grid."""
        return 2.0 * np.pi / (self.L * self.R)

    @property
    def flat_x(self) -> np.ndarray:
        return self.x.reshape(-1)

    @classmethod
    def from_dx(cls, epsilon: float, dx: float) -> "Grid":
        """Build the grid whose global spacing is dx."""
        L = _cell_count(epsilon)
        R_float = 2.0 * np.pi / (L * dx)
        R = int(round(R_float))
        if abs(R_float - R) > 1e-6:
            raise InvalidResolution(
                f"dx={dx!r} does not give an integer number of points per cell"
            )
        return make_grid(epsilon, R)

    def same_as(self, other: "Grid") -> bool:
        return (
            self.L == other.L
            and self.R == other.R
            and abs(self.epsilon - other.epsilon) <= 1e-12
        )

    def require_same(self, other: "Grid") -> None:
        if not self.same_as(other):
            raise GridMismatch(
                f"grid (eps={self.epsilon}, L={self.L}, R={self.R}) does not match "
                f"(eps={other.epsilon}, L={other.L}, R={other.R})"
            )


def _cell_count(epsilon: float) -> int:
    if not (0.0 < epsilon <= 1.0):
        raise NonIntegerCellCount(f"epsilon must lie in (0, 1], got {epsilon!r}")

    inverse = 1.0 / epsilon
    L = int(round(inverse))
    if abs(inverse - L) > CELL_COUNT_TOL:
        raise NonIntegerCellCount(f"1/epsilon = {inverse!r} is not an integer")
    return L


def make_grid(epsilon: float, R: int) -> Grid:
    """
    Build a grid with L = round(1/epsilon) cells and R points per cell.

    Parameters
    ----------
    epsilon : float
        Semiclassical parameter; 1/epsilon must be an integer.
    R : int
        Points per cell, even and >= 4.

    Returns
    -------
    Grid
    """
    L = _cell_count(epsilon)

    if int(R) != R or R < 4 or R % 2 != 0:
        raise InvalidResolution(f"R must be an even integer >= 4, got {R!r}")

    return Grid(epsilon=float(epsilon), L=L, R=int(R))


def grid_from_divisor(epsilon: float, dx_divisor: int) -> Grid:
    """Grid with spacing dx = pi / dx_divisor, the convention of the experiment tables."""
    L = _cell_count(epsilon)
    points = 2 * int(dx_divisor)
    if points % L != 0:
        raise InvalidResolution(
            f"dx = pi/{dx_divisor} does not split into {L} equal cells"
        )
    return make_grid(epsilon, points // L)


def restrict(values: np.ndarray, fine: Grid, coarse: Grid) -> np.ndarray:
    """
    Inject a fine-grid field onto a coarser grid.

    The fine global point count must be an integer multiple of the
    coarse one; coarse point n coincides with fine point n * ratio.
    """
    if fine.L != coarse.L or abs(fine.epsilon - coarse.epsilon) > 1e-12:
        raise GridMismatch("restriction needs grids with the same cell layout")
    if fine.R % coarse.R != 0:
        raise GridMismatch(f"R={fine.R} is not a multiple of R={coarse.R}")

    ratio = fine.R // coarse.R
    values = np.asarray(values)
    return values[..., ::ratio]
