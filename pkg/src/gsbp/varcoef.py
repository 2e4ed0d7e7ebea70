"""Penalty-corrected variable-coefficient operators.

For any operator satisfying the encapsulated SBP identity
Q + Q^T = E^T P N E, a naive variable-coefficient product Psi Q Phi breaks
the identity when the boundary projection E is inexact. The boundary
penalty correction restores it for arbitrary coefficient vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import ReferenceElementOps


@dataclass(frozen=True)
class SbpBase:
    """One directional encapsulated SBP operator (P, Q, E, P_face, N)."""

    P: np.ndarray       # volume norm entries
    Q: np.ndarray       # dense undivided difference matrix
    E: np.ndarray       # restriction/projection, (n_face, n_vol)
    P_face: np.ndarray  # face quadrature entries
    N: np.ndarray       # face normal component entries

    @classmethod
    def from_reference(cls, ref: ReferenceElementOps, direction: str) -> "SbpBase":
        if direction == "xi":
            Q, N = ref.Q_xi, ref.N_xi
        elif direction == "eta":
            Q, N = ref.Q_eta, ref.N_eta
        else:
            raise ValueError(f"unknown direction {direction!r}")
        return cls(P=ref.P_hat, Q=Q, E=ref.E_faces, P_face=ref.P_hat_face, N=N)

    def sbp_residual(self) -> float:
        rhs = self.E.T @ (self.P_face[:, None] * self.N[:, None] * self.E)
        return float(np.max(np.abs(self.Q + self.Q.T - rhs)))


@dataclass(frozen=True)
class VarCoefOperator:
    base: SbpBase
    Phi: np.ndarray
    Psi: np.ndarray
    phi: np.ndarray  # surface coefficient, by default E Phi
    psi: np.ndarray  # surface coefficient, by default E Psi
    Q_corrected: np.ndarray

    def apply(self, U: np.ndarray) -> np.ndarray:
        """P^{-1} Q_corrected U, the corrected approximation of Psi (Phi u)_x."""
        return (self.Q_corrected @ U) / self.base.P


def correction_matrix(
    base: SbpBase,
    Phi: np.ndarray,
    Psi: np.ndarray,
    phi: np.ndarray,
    psi: np.ndarray,
) -> np.ndarray:
    """(1/2) (psi E + E Psi)^T P N (phi E - E Phi)."""
    left = psi[:, None] * base.E + base.E * Psi[None, :]
    right = phi[:, None] * base.E - base.E * Phi[None, :]
    return 0.5 * left.T @ (base.P_face[:, None] * base.N[:, None] * right)


def build_varcoef_q(
    base: SbpBase,
    Phi: np.ndarray,
    Psi: np.ndarray,
    phi: np.ndarray | None = None,
    psi: np.ndarray | None = None,
) -> VarCoefOperator:
    """Corrected operator Q_{Phi,Psi} = Psi Q Phi + boundary correction.

    Surface coefficients default to the projections E Phi and E Psi; explicit
    values may be supplied (used for metric terms).
    """
    Phi = np.asarray(Phi, dtype=float)
    Psi = np.asarray(Psi, dtype=float)
    n_vol = base.Q.shape[0]
    if Phi.shape != (n_vol,) or Psi.shape != (n_vol,):
        raise ValueError("coefficient vectors must match the operator volume dimension")
    phi = base.E @ Phi if phi is None else np.asarray(phi, dtype=float)
    psi = base.E @ Psi if psi is None else np.asarray(psi, dtype=float)
    if phi.shape != (base.E.shape[0],) or psi.shape != (base.E.shape[0],):
        raise ValueError("surface coefficient vectors must match the face dimension")

    Q_naive = Psi[:, None] * base.Q * Phi[None, :]
    Q_corr = Q_naive + correction_matrix(base, Phi, Psi, phi, psi)
    return VarCoefOperator(base=base, Phi=Phi, Psi=Psi, phi=phi, psi=psi, Q_corrected=Q_corr)


def varcoef_identity_residual(op_fw: VarCoefOperator, op_bw: VarCoefOperator) -> float:
    """Residual of Q_{Phi,Psi} + Q_{Psi,Phi}^T = (psi E)^T P N (phi E)."""
    base = op_fw.base
    rhs = (op_fw.psi[:, None] * base.E).T @ (
        base.P_face[:, None] * base.N[:, None] * (op_fw.phi[:, None] * base.E)
    )
    return float(np.max(np.abs(op_fw.Q_corrected + op_bw.Q_corrected.T - rhs)))


def check_inner_product_mimicry(
    base: SbpBase,
    Phi: np.ndarray,
    Psi: np.ndarray,
    U: np.ndarray,
    V: np.ndarray,
) -> float:
    """Residual of the discrete integration-by-parts inner product statement.

    |(V, D_{Phi,Psi} U)_P + (U, D_{Psi,Phi} V)_P - (psi v)^T P N (phi u)|
    with u = E U, v = E V.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.shape != base.P.shape or V.shape != base.P.shape:
        raise ValueError("vector lengths must match the operator volume dimension")
    fw = build_varcoef_q(base, Phi, Psi)
    bw = build_varcoef_q(base, Psi, Phi)
    u, v = base.E @ U, base.E @ V
    lhs = V @ (fw.Q_corrected @ U) + U @ (bw.Q_corrected @ V)
    rhs = (fw.psi * v) @ (base.P_face * base.N * (fw.phi * u))
    return float(abs(lhs - rhs))


def naive_inner_product_residual(
    base: SbpBase,
    Phi: np.ndarray,
    Psi: np.ndarray,
    U: np.ndarray,
    V: np.ndarray,
) -> float:
    """Same statement evaluated with the uncorrected product Psi Q Phi."""
    Q_naive_fw = np.asarray(Psi)[:, None] * base.Q * np.asarray(Phi)[None, :]
    Q_naive_bw = np.asarray(Phi)[:, None] * base.Q * np.asarray(Psi)[None, :]
    phi, psi = base.E @ Phi, base.E @ Psi
    u, v = base.E @ U, base.E @ V
    lhs = V @ (Q_naive_fw @ U) + U @ (Q_naive_bw @ V)
    rhs = (psi * v) @ (base.P_face * base.N * (phi * u))
    return float(abs(lhs - rhs))
