"""
potentials.py

Periodic lattice potentials V(y) and random external potentials U(x, z).

Key points:
- Lattice potentials are sampled on one cell, y in [0, 2pi)
- Built-in lattice potentials also carry their exact Fourier coefficients
  V_hat(n) = (1/2pi) int V(y) exp(-i n y) dy; custom ones are sampled only
- Random potentials take a spatial array x and a random input z in [-1, 1];
  z broadcasts against x (scalar, or shaped (n, 1, 1) for a batch of nodes)
- Jumps are sampled with the left-limit value, i.e. indicator sets are
  closed on the right: 1_{(a, b]}
- Built-ins are looked up by name through LATTICE_POTENTIALS / RANDOM_POTENTIALS
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from lattice.errors import ScenarioError


class LatticeKind(str, Enum):
    MATHIEU = "mathieu"
    KRONIG_PENNEY = "kronig_penney"
    WEAK_MATHIEU = "weak_mathieu"
    FREE = "free"
    CUSTOM = "custom"


class RandomKind(str, Enum):
    HARMONIC_NOISE = "harmonic_noise"
    STEP_DECAY = "step_decay"
    LINEAR_FORCE = "linear_force"
    ANDERSON_COSINE = "anderson_cosine"
    CUSTOM = "custom"


def _indicator_left_limit(x: np.ndarray, a: float, b: float) -> np.ndarray:
    # left-limit sampling of 1_[a, b] puts 0 at a and 1 at b
    return ((x > a) & (x <= b)).astype(float)


def _cosine_coefficients(mean: float, amplitude: float) -> Callable[[np.ndarray], np.ndarray]:
    """V_hat for mean + amplitude * cos(y)."""

    def coefficients(n: np.ndarray) -> np.ndarray:
        n = np.asarray(n)
        return np.where(n == 0, mean, np.where(np.abs(n) == 1, 0.5 * amplitude, 0.0))

    return coefficients


def _barrier_coefficients(n: np.ndarray) -> np.ndarray:
    """V_hat of 1_(pi/2, 3pi/2]: (-1)^n sin(n pi/2) / (n pi), and 1/2 at n = 0."""
    n = np.asarray(n)
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    return sign * 0.5 * np.sinc(0.5 * n)


@dataclass(frozen=True)
class PeriodicPotential:
    """
    A 2pi-periodic lattice potential.

    `sampler` is only ever called on one period; `__call__` reduces its
    argument modulo 2pi so periodicity holds by construction.

    `fourier` maps integer arrays n to V_hat(n) when the coefficients are
    known in closed form. `smooth` is False for potentials with jumps,
    whose Bloch functions are only C^1 inside a cell.
    """

    name: str
    kind: LatticeKind
    sampler: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    fourier: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False, repr=False)
    smooth: bool = True

    def __call__(self, y) -> np.ndarray:
        y = np.mod(np.asarray(y, dtype=float), 2.0 * np.pi)
        return np.asarray(self.sampler(y), dtype=float) + np.zeros_like(y)

    @property
    def has_exact_coefficients(self) -> bool:
        return self.fourier is not None

    def coefficients(self, n) -> np.ndarray:
        """Exact V_hat(n), complex, shaped like n."""
        if self.fourier is None:
            raise ValueError(f"potential {self.name!r} has no closed-form Fourier coefficients")
        n = np.asarray(n, dtype=int)
        return np.asarray(self.fourier(n), dtype=complex) + np.zeros(n.shape)

    @classmethod
    def custom(
        cls, name: str, sampler: Callable[[np.ndarray], np.ndarray], smooth: bool = True
    ) -> "PeriodicPotential":
        return cls(name=name, kind=LatticeKind.CUSTOM, sampler=sampler, smooth=smooth)


@dataclass(frozen=True)
class RandomPotential:
    """
    An external potential U(x, z) depending on one uniform random input z.

    `sigma` is the randomness magnitude; only the Anderson potential reads it.
    """

    name: str
    kind: RandomKind
    evaluator: Callable[[np.ndarray, np.ndarray, float], np.ndarray] = field(
        compare=False, repr=False
    )
    sigma: float = 0.0

    def __call__(self, x, z) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        values = self.evaluator(x, z, self.sigma)
        return np.broadcast_to(values, np.broadcast(x, z).shape).astype(float)

    @classmethod
    def custom(cls, name, evaluator, sigma: float = 0.0) -> "RandomPotential":
        return cls(name=name, kind=RandomKind.CUSTOM, evaluator=evaluator, sigma=sigma)


# --------------------------------------------------
# Lattice potentials
# --------------------------------------------------
def mathieu() -> PeriodicPotential:
    return PeriodicPotential(
        "mathieu",
        LatticeKind.MATHIEU,
        lambda y: np.cos(y) + 1.0,
        fourier=_cosine_coefficients(1.0, 1.0),
    )


def kronig_penney() -> PeriodicPotential:
    """Square barriers of height 1 on (pi/2, 3pi/2] in every cell."""
    return PeriodicPotential(
        "kronig_penney",
        LatticeKind.KRONIG_PENNEY,
        lambda y: _indicator_left_limit(y, 0.5 * np.pi, 1.5 * np.pi),
        fourier=_barrier_coefficients,
        smooth=False,
    )


def weak_mathieu() -> PeriodicPotential:
    return PeriodicPotential(
        "weak_mathieu",
        LatticeKind.WEAK_MATHIEU,
        lambda y: 0.5 + 0.5 * np.cos(y),
        fourier=_cosine_coefficients(0.5, 0.5),
    )


def free_lattice() -> PeriodicPotential:
    return PeriodicPotential(
        "free", LatticeKind.FREE, lambda y: np.zeros_like(y), fourier=lambda n: np.zeros(np.shape(n))
    )


# --------------------------------------------------
# Random external potentials
# --------------------------------------------------
def harmonic_noise() -> RandomPotential:
    """Harmonic trap with weak noise: |x - pi|^2 + 0.5 (z cos 2x + 1)."""
    return RandomPotential(
        "harmonic_noise",
        RandomKind.HARMONIC_NOISE,
        lambda x, z, s: (x - np.pi) ** 2 + 0.5 * (z * np.cos(2.0 * x) + 1.0),
    )


def step_decay() -> RandomPotential:
    """Non-smooth potential 1_[pi/2, 3pi/2](x) + 2 (z + 1)/(x + 1)."""
    return RandomPotential(
        "step_decay",
        RandomKind.STEP_DECAY,
        lambda x, z, s: _indicator_left_limit(x, 0.5 * np.pi, 1.5 * np.pi)
        + 2.0 * (z + 1.0) / (x + 1.0),
    )


def linear_force() -> RandomPotential:
    """Random electric force field (1 + 0.1 z) x."""
    return RandomPotential(
        "linear_force", RandomKind.LINEAR_FORCE, lambda x, z, s: (1.0 + 0.1 * z) * x
    )


def anderson_cosine(sigma: float) -> RandomPotential:
    """Disorder sigma |z| cos(x); sigma = 0 is the deterministic control."""
    return RandomPotential(
        "anderson_cosine",
        RandomKind.ANDERSON_COSINE,
        lambda x, z, s: s * np.abs(z) * np.cos(x),
        sigma=float(sigma),
    )


def free_random() -> RandomPotential:
    return RandomPotential.custom(
        "free", lambda x, z, s: np.zeros(np.broadcast(x, z).shape)
    )


LATTICE_POTENTIALS: dict[str, Callable[[], PeriodicPotential]] = {
    "mathieu": mathieu,
    "kronig_penney": kronig_penney,
    "weak_mathieu": weak_mathieu,
    "free": free_lattice,
}

RANDOM_POTENTIALS: dict[str, Callable[[float], RandomPotential]] = {
    "harmonic_noise": lambda sigma: harmonic_noise(),
    "step_decay": lambda sigma: step_decay(),
    "linear_force": lambda sigma: linear_force(),
    "anderson_cosine": anderson_cosine,
    "free": lambda sigma: free_random(),
}


def lattice_potential(name: str) -> PeriodicPotential:
    try:
        return LATTICE_POTENTIALS[name]()
    except KeyError:
        raise ScenarioError(
            f"unknown lattice potential {name!r}; expected one of {sorted(LATTICE_POTENTIALS)}"
        ) from None


def random_potential(name: str, sigma: float = 0.0) -> RandomPotential:
    try:
        return RANDOM_POTENTIALS[name](sigma)
    except KeyError:
        raise ScenarioError(
            f"unknown random potential {name!r}; expected one of {sorted(RANDOM_POTENTIALS)}"
        ) from None
