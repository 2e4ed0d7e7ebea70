"""1D pseudo-spectral SBP operators on a nodal quadrature.

The undivided difference matrix Q is the exact integral of L L'^T over the
interval, evaluated with an auxiliary Gauss rule of sufficient degree. The
boundary projection rows are the Lagrange cardinal values at the endpoints,
so the operator is SBP in the generalized sense for any node set and reduces
to the classical (unit boundary row) form on boundary-conforming nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import (
    NodalQuadrature1D,
    differentiation_matrix,
    gauss_legendre,
    lagrange_eval,
    lagrange_matrix,
)


@dataclass(frozen=True)
class Sbp1D:
    quad: NodalQuadrature1D
    P: np.ndarray        # diagonal norm entries (quadrature weights)
    Q: np.ndarray        # dense undivided difference matrix
    e_left: np.ndarray   # projection row to x = 0
    e_right: np.ndarray  # projection row to x = 1
    poly_degree: int

    @property
    def num_nodes(self) -> int:
        return self.quad.num_nodes

    @property
    def D(self) -> np.ndarray:
        return self.Q / self.P[:, None]


@dataclass(frozen=True)
class Sbp1DReport:
    """Max residuals of the four Sbp1D invariants."""

    sbp_identity: float
    consistency: float
    accuracy: float
    unit_boundary_rows: float | None


def build_sbp_1d(quad: NodalQuadrature1D) -> Sbp1D:
    n = quad.num_nodes
    N = n - 1

    # Integrand L_i L_j' has degree <= 2N-1; N+1 Gauss points integrate it exactly.
    aux = gauss_legendre(max(N, 1) + 1)
    L_aux = lagrange_matrix(quad, aux.nodes)           # (n_aux, n)
    D_nodes = differentiation_matrix(quad)             # L_j'(node_k)
    Lp_aux = L_aux @ D_nodes                           # L_j' sampled at aux points
    Q = L_aux.T @ (aux.weights[:, None] * Lp_aux)

    return Sbp1D(
        quad=quad,
        P=quad.weights.copy(),
        Q=Q,
        e_left=lagrange_eval(quad, 0.0),
        e_right=lagrange_eval(quad, 1.0),
        poly_degree=N,
    )


def verify_sbp_1d(op: Sbp1D) -> Sbp1DReport:
    n = op.num_nodes
    ones = np.ones(n)

    boundary = np.outer(op.e_right, op.e_right) - np.outer(op.e_left, op.e_left)
    sbp_identity = float(np.max(np.abs(op.Q + op.Q.T - boundary)))
    consistency = float(np.max(np.abs(op.Q @ ones)))

    D = op.D
    x = op.quad.nodes
    accuracy = 0.0
    for j in range(op.poly_degree + 1):
        exact = j * x ** (j - 1) if j > 0 else np.zeros(n)
        accuracy = max(accuracy, float(np.max(np.abs(D @ x**j - exact))))

    unit_rows = None
    if op.quad.boundary_conforming:
        el = np.zeros(n)
        el[0] = 1.0
        er = np.zeros(n)
        er[-1] = 1.0
        unit_rows = float(max(np.max(np.abs(op.e_left - el)), np.max(np.abs(op.e_right - er))))

    return Sbp1DReport(sbp_identity, consistency, accuracy, unit_rows)
