"""Gauss-Legendre and Gauss-Lobatto nodal quadratures on [0,1].

Nodes are computed with Newton iteration on the Legendre polynomial (or its
derivative) using Chebyshev initial guesses, then mapped from [-1,1] to the
unit interval. Lagrange cardinal functions are evaluated in barycentric form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_POLY_DEGREE = 20

_NEWTON_TOL = 1e-15
_NEWTON_MAXIT = 100


@dataclass(frozen=True)
class NodalQuadrature1D:
    """A nodal quadrature rule on the unit interval.

    degree is the highest monomial degree integrated exactly;
    boundary_conforming is True iff 0 and 1 are quadrature nodes.
    """

    nodes: np.ndarray
    weights: np.ndarray
    degree: int
    boundary_conforming: bool

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be 1D arrays of equal length")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if nodes[0] < -1e-15 or nodes[-1] > 1 + 1e-15:
            raise ValueError("nodes must lie in [0,1]")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")

    @property
    def num_nodes(self) -> int:
        return self.nodes.size


def _legendre_and_deriv(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values of P_n and P_n' at x on [-1,1] via the three-term recurrence."""
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for k in range(1, n):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = n * (x * p - p_prev) / (x * x - 1.0)
    endpoint = np.abs(np.abs(x) - 1.0) < 1e-300
    if np.any(endpoint):
        # P_n'(+-1) = (+-1)^(n+1) n(n+1)/2
        dp = np.where(endpoint, np.sign(x) ** (n + 1) * n * (n + 1) / 2.0, dp)
    return p, dp


def _symmetrize(nodes: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Enforce exact symmetry about 0.5 (the rules are symmetric analytically).
    nodes = 0.5 * (nodes + (1.0 - nodes[::-1]))
    weights = 0.5 * (weights + weights[::-1])
    weights = weights / weights.sum()
    return nodes, weights


def gauss_legendre(num_nodes: int) -> NodalQuadrature1D:
    """Gauss-Legendre rule with num_nodes points on [0,1]; exact to degree 2n-1."""
    if num_nodes < 1:
        raise ValueError("gauss_legendre requires num_nodes >= 1")
    if num_nodes > MAX_POLY_DEGREE + 1:
        raise ValueError(f"supported up to {MAX_POLY_DEGREE + 1} nodes")
    n = num_nodes
    if n == 1:
        return NodalQuadrature1D(np.array([0.5]), np.array([1.0]), 1, False)

    # Roots of P_n, Chebyshev initial guesses.
    x = np.cos(np.pi * (4 * np.arange(1, n + 1) - 1) / (4 * n + 2))
    for _ in range(_NEWTON_MAXIT):
        p, dp = _legendre_and_deriv(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    _, dp = _legendre_and_deriv(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)

    nodes = (1.0 - x) / 2.0  # x descending -> nodes ascending
    weights = w / 2.0
    nodes, weights = _symmetrize(nodes, weights)
    return NodalQuadrature1D(nodes, weights, 2 * n - 1, False)


def gauss_lobatto(num_nodes: int) -> NodalQuadrature1D:
    """Gauss-Lobatto rule with num_nodes points on [0,1]; endpoints included."""
    if num_nodes < 2:
        raise ValueError("gauss_lobatto requires num_nodes >= 2")
    if num_nodes > MAX_POLY_DEGREE + 1:
        raise ValueError(f"supported up to {MAX_POLY_DEGREE + 1} nodes")
    n = num_nodes
    if n == 2:
        return NodalQuadrature1D(np.array([0.0, 1.0]), np.array([0.5, 0.5]), 1, True)

    # Interior nodes are the roots of P_{n-1}'; Chebyshev-Lobatto guesses.
    x = np.cos(np.pi * np.arange(1, n - 1) / (n - 1))
    m = n - 1
    for _ in range(_NEWTON_MAXIT):
        p, dp = _legendre_and_deriv(m, x)
        # P_m'' from Legendre's differential equation.
        d2p = (2.0 * x * dp - m * (m + 1) * p) / (1.0 - x * x)
        dx = dp / d2p
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    x_full = np.concatenate(([1.0], x, [-1.0]))
    p, _ = _legendre_and_deriv(m, x_full)
    w = 2.0 / (m * (m + 1) * p * p)

    nodes = (1.0 - x_full) / 2.0
    weights = w / 2.0
    nodes, weights = _symmetrize(nodes, weights)
    return NodalQuadrature1D(nodes, weights, 2 * n - 3, True)


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def lagrange_matrix(quad: NodalQuadrature1D, points: np.ndarray) -> np.ndarray:
    """Evaluate all cardinal Lagrange polynomials at points.

    Returns an array of shape (len(points), num_nodes); row p contains the
    values of every cardinal polynomial at points[p]. Rows sum to one.
    """
    points = np.atleast_1d(np.asarray(points, dtype=float))
    if not np.all(np.isfinite(points)):
        raise ValueError("evaluation points must be finite")
    nodes = quad.nodes
    bw = barycentric_weights(nodes)
    out = np.empty((points.size, nodes.size))
    diff = points[:, None] - nodes[None, :]
    exact = np.abs(diff) < 1e-300
    any_exact = exact.any(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = bw[None, :] / diff
        out = terms / terms.sum(axis=1, keepdims=True)
    if np.any(any_exact):
        out[any_exact] = exact[any_exact].astype(float)
    return out


def lagrange_eval(quad: NodalQuadrature1D, point: float) -> np.ndarray:
    """Values of all cardinal Lagrange polynomials on quad.nodes at one point."""
    return lagrange_matrix(quad, np.array([point]))[0]


def differentiation_matrix(quad: NodalQuadrature1D) -> np.ndarray:
    """Nodal differentiation matrix D with D[i,j] = L_j'(node_i)."""
    nodes = quad.nodes
    bw = barycentric_weights(nodes)
    n = nodes.size
    D = np.zeros((n, n))
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (bw[None, :] / bw[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D
