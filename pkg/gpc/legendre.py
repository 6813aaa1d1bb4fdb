"""
legendre.py

Orthonormal Legendre polynomial chaos for one random input z ~ U[-1, 1].

Key points:
- Phi_p(z) = sqrt(2p + 1) P_p(z), p = 0..Q, so E[Phi_p Phi_q] = delta_pq
  under the probability measure dz/2; Phi_0 = 1
- Gauss-Legendre weights are halved so they sum to one (the measure
  dz/2, not dz)
- Default rule size n_q = 2Q + 2 integrates every triple product and every
  degree-(Q + 1) potential exactly
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss, legvander


def orthonormal_legendre(z, Q: int) -> np.ndarray:
    """sqrt(2p + 1) P_p(z) for p = 0..Q, stacked on a new last axis."""
    z = np.asarray(z, dtype=float)
    return legvander(z, Q) * np.sqrt(2.0 * np.arange(Q + 1) + 1.0)


def default_node_count(Q: int) -> int:
    return 2 * Q + 2


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre rule on [-1, 1] for the measure dz/2."""
    if n < 1:
        raise ValueError(f"need at least one quadrature node, got {n}")
    nodes, weights = leggauss(n)
    return nodes, 0.5 * weights


@dataclass(frozen=True, eq=False)
class GpcBasis:
    """
    Basis {Phi_0, ..., Phi_Q} plus the quadrature rule used to project on it.

    Parameters
    ----------
    Q : int
        Highest polynomial degree.
    n_nodes : int, optional
        Quadrature size; defaults to 2Q + 2.
    """

    Q: int
    n_nodes: Optional[int] = None
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.Q < 0:
            raise ValueError(f"gPC order must be >= 0, got {self.Q}")
        n = default_node_count(self.Q) if self.n_nodes is None else int(self.n_nodes)
        if n < self.Q + 1:
            raise ValueError(f"{n} nodes cannot resolve degree {self.Q}")

        nodes, weights = gauss_legendre(n)
        object.__setattr__(self, "n_nodes", n)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def P(self) -> int:
        return self.Q + 1

    def vandermonde(self, z) -> np.ndarray:
        """Phi_p(z) for every p, shaped z.shape + (P,)."""
        return orthonormal_legendre(z, self.Q)

    def evaluate(self, p: int, z) -> np.ndarray:
        """Phi_p(z), p counted from 0."""
        if not 0 <= p < self.P:
            raise IndexError(f"basis index {p} outside 0..{self.P - 1}")
        return self.vandermonde(z)[..., p]

    def expectation(self, values: np.ndarray) -> np.ndarray:
        """E[f] from f sampled at the nodes along axis 0."""
        return np.tensordot(self.weights, values, axes=(0, 0))


def triple_products(basis: GpcBasis) -> np.ndarray:
    """
    e[j, q, p] = E[Phi_j Phi_q Phi_p] by quadrature.

    The integrand has degree 3Q, so the rule needs at least
    ceil((3Q + 1) / 2) nodes.
    """
    needed = -(-(3 * basis.Q + 1) // 2)
    if basis.n_nodes < needed:
        raise ValueError(
            f"triple products of degree {3 * basis.Q} need {needed} nodes, basis has {basis.n_nodes}"
        )

    phi = basis.vandermonde(basis.nodes)
    return basis.expectation(np.einsum("nj,nq,np->njqp", phi, phi, phi))
