"""
bloch_step.py

The Bloch-decomposition time-splitting step for one wavefunction (or a
stack of them): the lattice step solves
    i eps d_t psi = -eps^2/2 d_xx psi + V(x/eps) psi
exactly in the Bloch basis, the potential step solves
    i eps d_t psi = U(x) psi
exactly pointwise.

Key points:
- Every function works on arrays shaped (..., L, R); leading axes (the
  gPC index p, a batch of collocation nodes) are carried along, which is
  how the P coefficient fields of the Galerkin system evolve together
- Cell transform: forward sum without prefactor across cells, inverse
  with 1/L; inside a cell the 2*pi/R quadrature weight is explicit
- Analysis and synthesis use one FFT over lambda per k_l, cost
  M*R*log(R) per cell index instead of a dense R x R product
"""

from dataclasses import dataclass

import numpy as np

from bloch.band_table import LatticeTable
from lattice.errors import GridMismatch
from lattice.grid import Grid
from lattice.wavefield import rewrap_field, unwrap_field


@dataclass(frozen=True, eq=False)
class BlochCoefficients:
    """C[..., m, l] ~ C_m(k_l): projection of the transformed field on band m."""

    C: np.ndarray


def _alternating_sign(L: int) -> np.ndarray:
    # exp(-i 2 pi k_l (j - 1)) with k_l = -1/2 + (l - 1)/L splits into
    # (-1)^(j-1) times the plain DFT kernel
    return np.where(np.arange(L) % 2 == 0, 1.0, -1.0)[:, None]


def cell_transform(field) -> np.ndarray:
    """psi~_{l,r} = sum_j psi_{j,r} exp(-i 2 pi k_l (j - 1))."""
    values, _ = unwrap_field(field)
    L = values.shape[-2]
    return np.fft.fft(_alternating_sign(L) * values, axis=-2)


def inverse_cell_transform(transformed, grid=None):
    """psi_{l,r} = (1/L) sum_j psi~_{j,r} exp(i 2 pi k_j (l - 1)); a WaveField if grid is given."""
    transformed = np.asarray(transformed, dtype=complex)
    L = transformed.shape[-2]
    values = _alternating_sign(L) * np.fft.ifft(transformed, axis=-2)
    return rewrap_field(values, grid)


def analyze(transformed: np.ndarray, table: LatticeTable) -> BlochCoefficients:
    """
    C_{m,l} = (2pi/R) sum_r psi~_{l,r} conj(phi_m(y_r, k_l)).

    Parameters
    ----------
    transformed : np.ndarray
        Output of cell_transform, shaped (..., L, R).
    table : LatticeTable
        Bands for the same grid.
    """
    grid = table.grid
    transformed = np.asarray(transformed)
    if transformed.shape[-2:] != grid.shape:
        raise GridMismatch(
            f"field shaped {transformed.shape[-2:]} does not match table grid {grid.shape}"
        )

    R = grid.R
    bloch_phase = np.exp(-1j * grid.k[:, None] * grid.y[None, :])

    # g[..., l, lambda] = sum_r psi~ exp(-i (k_l + lambda) y_r)
    g = np.fft.fftshift(np.fft.fft(transformed * bloch_phase, axis=-1), axes=-1)

    C = np.sqrt(2.0 * np.pi) / R * np.einsum("lam,...la->...ml", table.chi_hat.conj(), g)
    return BlochCoefficients(C)


def evolve_bands(
    coefficients: BlochCoefficients, table: LatticeTable, dt: float, epsilon: float
) -> BlochCoefficients:
    """C_{m,l} exp(-i E_m(k_l) dt / eps)."""
    return BlochCoefficients(coefficients.C * np.exp(-1j * table.energies * dt / epsilon))


def synthesize(coefficients: BlochCoefficients, table: LatticeTable) -> np.ndarray:
    """psi~_{l,r} = sum_m C_{m,l} phi_m(y_r, k_l), shaped (..., L, R)."""
    grid = table.grid
    R = grid.R

    h = np.einsum("lam,...ml->...la", table.chi_hat, coefficients.C)
    periodic = R * np.fft.ifft(np.fft.ifftshift(h, axes=-1), axis=-1)
    bloch_phase = np.exp(1j * grid.k[:, None] * grid.y[None, :])
    return bloch_phase * periodic / np.sqrt(2.0 * np.pi)


def bd_lattice_step(field, table: LatticeTable, dt: float, epsilon: float):
    """
    Exact lattice step over dt: cell transform, band projection, band
    phases, synthesis, inverse cell transform.

    Returns the same kind of object it was given (WaveField or array).
    """
    values, grid = unwrap_field(field)
    if grid is not None:
        grid.require_same(table.grid)

    transformed = cell_transform(values)
    coefficients = evolve_bands(analyze(transformed, table), table, dt, epsilon)
    values = inverse_cell_transform(synthesize(coefficients, table))
    return rewrap_field(values, grid)


def project_to_grid(values, fine: Grid, coarse: Grid) -> np.ndarray:
    """
    Restrict fields shaped (..., L, R_fine) to a coarser grid.

    Keeps the plane waves exp(i (k_l + lambda) y) with lambda in the
    coarse window -R/2..R/2-1 and evaluates them at the coarse points.
    Content outside the window is dropped rather than aliased, so the
    result is the L2 projection onto the fields the coarse grid's Bloch
    step can represent.
    """
    if fine.L != coarse.L or abs(fine.epsilon - coarse.epsilon) > 1e-12:
        raise GridMismatch("projection needs grids with the same cell layout")
    if coarse.R > fine.R:
        raise GridMismatch(f"cannot project R={fine.R} onto the finer R={coarse.R}")

    values = np.asarray(values, dtype=complex)
    if values.shape[-2:] != fine.shape:
        raise GridMismatch(f"field shaped {values.shape[-2:]} does not match grid {fine.shape}")

    transformed = cell_transform(values) * np.exp(-1j * fine.k[:, None] * fine.y[None, :])
    amplitudes = np.fft.fftshift(np.fft.fft(transformed, axis=-1), axes=-1) / fine.R

    offset = (fine.R - coarse.R) // 2
    kept = amplitudes[..., offset:offset + coarse.R]

    periodic = coarse.R * np.fft.ifft(np.fft.ifftshift(kept, axes=-1), axis=-1)
    return inverse_cell_transform(np.exp(1j * coarse.k[:, None] * coarse.y[None, :]) * periodic)


def potential_phase_step(field, U_values: np.ndarray, dt: float, epsilon: float):
    """psi exp(-i U(x) dt / eps), pointwise on the grid."""
    values, grid = unwrap_field(field)
    values = values * np.exp(-1j * np.asarray(U_values) * dt / epsilon)
    return rewrap_field(values, grid)


def bd_split_step(
    field,
    table: LatticeTable,
    U_values: np.ndarray,
    dt: float,
    epsilon: float,
    splitting: str = "strang",
):
    """
    One deterministic BD step with external potential U.

    strang      : U/2, lattice, U/2
    first-order : lattice, then U
    """
    if splitting == "strang":
        field = potential_phase_step(field, U_values, 0.5 * dt, epsilon)
        field = bd_lattice_step(field, table, dt, epsilon)
        return potential_phase_step(field, U_values, 0.5 * dt, epsilon)

    if splitting == "first-order":
        field = bd_lattice_step(field, table, dt, epsilon)
        return potential_phase_step(field, U_values, dt, epsilon)

    raise ValueError(f"unknown splitting {splitting!r}")


def run_bloch(
    field,
    table: LatticeTable,
    U_values: np.ndarray,
    final_time: float,
    dt: float,
    splitting: str = "strang",
):
    """Deterministic BD solver for one realization of U; returns the field at final_time."""
    epsilon = table.grid.epsilon
    n_steps = int(round(final_time / dt))
    for _ in range(n_steps):
        field = bd_split_step(field, table, U_values, dt, epsilon, splitting)
    return field
