"""Inner-product preserving interface operators via L2 projection.

For a pair of opposing faces with a common overlap interval, the coupling
operators are cross-mass integrals of the two Lagrange bases divided by the
receiving face quadrature, which makes the adjointness (IPP) condition hold
by construction. A square-root rescaling transfers the property to
j-weighted (curvilinear) face quadratures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import FaceId
from .quadrature import NodalQuadrature1D, gauss_legendre, lagrange_matrix


@dataclass(frozen=True)
class FaceGrid:
    """Quadrature nodes of one element face in its tangential coordinate."""

    face: FaceId
    quad: NodalQuadrature1D
    extent: tuple[float, float]

    @property
    def nodes(self) -> np.ndarray:
        lo, hi = self.extent
        return lo + (hi - lo) * self.quad.nodes

    @property
    def weights(self) -> np.ndarray:
        lo, hi = self.extent
        return (hi - lo) * self.quad.weights

    @property
    def length(self) -> float:
        return self.extent[1] - self.extent[0]


@dataclass(frozen=True)
class InterfaceProjection:
    from_face: FaceId
    to_face: FaceId
    I: np.ndarray                   # (n_to, n_from)
    overlap: tuple[float, float]
    P_to: np.ndarray                # face quadrature on the receiving side
    P_from: np.ndarray


def build_l2_projection_pair(
    face_m: FaceGrid, face_n: FaceGrid, overlap: tuple[float, float]
) -> tuple[InterfaceProjection, InterfaceProjection]:
    """L2 cross-mass projections over the overlap, returned as (I_nm, I_mn).

    I_nm maps face-n nodal values to face-m nodes.
    """
    a, b = overlap
    if b - a <= 0:
        raise ValueError(f"empty overlap ({a}, {b})")
    for g in (face_m, face_n):
        lo, hi = g.extent
        if a < lo - 1e-12 or b > hi + 1e-12:
            raise ValueError(f"overlap ({a}, {b}) outside face extent {g.extent}")

    deg_m = face_m.quad.num_nodes - 1
    deg_n = face_n.quad.num_nodes - 1
    aux = gauss_legendre((deg_m + deg_n) // 2 + 1)
    pts = a + (b - a) * aux.nodes
    w = (b - a) * aux.weights

    # Lagrange bases in each face's own reference parameter.
    def basis(grid: FaceGrid) -> np.ndarray:
        lo, hi = grid.extent
        return lagrange_matrix(grid.quad, (pts - lo) / (hi - lo))

    Lm = basis(face_m)
    Ln = basis(face_n)
    cross = Lm.T @ (w[:, None] * Ln)  # (n_m, n_n)

    I_nm = cross / face_m.weights[:, None]
    I_mn = cross.T / face_n.weights[:, None]
    proj_nm = InterfaceProjection(
        from_face=face_n.face, to_face=face_m.face, I=I_nm, overlap=(a, b),
        P_to=face_m.weights, P_from=face_n.weights,
    )
    proj_mn = InterfaceProjection(
        from_face=face_m.face, to_face=face_n.face, I=I_mn, overlap=(a, b),
        P_to=face_n.weights, P_from=face_m.weights,
    )
    return proj_nm, proj_mn


def ipp_residual(proj_nm: InterfaceProjection, proj_mn: InterfaceProjection) -> float:
    """Max residual of P_m I_nm = (P_n I_mn)^T."""
    lhs = proj_nm.P_to[:, None] * proj_nm.I
    rhs = (proj_mn.P_to[:, None] * proj_mn.I).T
    return float(np.max(np.abs(lhs - rhs)))


def rescale_projection_curvilinear(
    proj_nm: InterfaceProjection,
    proj_mn: InterfaceProjection,
    j_m: np.ndarray,
    j_n: np.ndarray,
) -> tuple[InterfaceProjection, InterfaceProjection]:
    """Rescale a pair so IPP holds w.r.t. the stretched quadratures j P.

    j_m, j_n are the face stretching factors relative to the quadratures the
    pair was built with; constant factors leave the operators unchanged up
    to the quadrature update.
    """
    j_m = np.asarray(j_m, dtype=float)
    j_n = np.asarray(j_n, dtype=float)
    if np.any(j_m <= 0) or np.any(j_n <= 0):
        raise ValueError("face stretching factors must be positive")
    s_m, s_n = np.sqrt(j_m), np.sqrt(j_n)
    from dataclasses import replace

    new_nm = replace(
        proj_nm,
        I=proj_nm.I * (s_n[None, :] / s_m[:, None]),
        P_to=j_m * proj_nm.P_to,
        P_from=j_n * proj_nm.P_from,
    )
    new_mn = replace(
        proj_mn,
        I=proj_mn.I * (s_m[None, :] / s_n[:, None]),
        P_to=j_n * proj_mn.P_to,
        P_from=j_m * proj_mn.P_from,
    )
    return new_nm, new_mn


def max_exact_monomial_degree(
    face_m: FaceGrid, neighbor_grids: list[FaceGrid], tol: float = 1e-9
) -> int:
    """Largest j with sum_n I_nm y_n^j = y_m^j, accumulated over all neighbors."""
    y_m = face_m.nodes
    acc = {}
    for g in neighbor_grids:
        lo = max(face_m.extent[0], g.extent[0])
        hi = min(face_m.extent[1], g.extent[1])
        proj, _ = build_l2_projection_pair(face_m, g, (lo, hi))
        acc[g.face] = proj
    max_deg = -1
    for j in range(face_m.quad.num_nodes + 3):
        total = np.zeros_like(y_m)
        for g in neighbor_grids:
            total += acc[g.face].I @ g.nodes**j
        # Relative to the monomial's magnitude on this face, so short faces
        # (where y^j is uniformly tiny) are judged on the same footing.
        scale = max(np.max(np.abs(y_m)) ** j, np.finfo(float).eps)
        if np.max(np.abs(total - y_m**j)) <= tol * scale:
            max_deg = j
        else:
            break
    return max_deg
