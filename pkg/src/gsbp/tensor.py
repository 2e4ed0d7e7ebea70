"""Tensor-product lift of 1D SBP operators to the reference unit square.

Volume nodes are ordered xi-major (all eta nodes for the first xi node,
then the next xi node, ...). Face nodes are stacked East, West, North,
South, each ordered along the increasing tangential coordinate. The
Kronecker factors are kept so that derivative applications can run in
factored form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sbp1d import Sbp1D

FACE_TAGS = ("E", "W", "N", "S")


@dataclass(frozen=True)
class ReferenceElementOps:
    op_xi: Sbp1D
    op_eta: Sbp1D
    P_hat: np.ndarray        # volume norm entries, length n_xi*n_eta
    Q_xi: np.ndarray         # Q_xi^(1D) x P_eta
    Q_eta: np.ndarray        # P_xi x Q_eta^(1D)
    E_faces: np.ndarray      # stacked restriction, rows E,W,N,S
    P_hat_face: np.ndarray   # face quadrature entries, same stacking
    N_xi: np.ndarray         # diagonal sign entries (+E, -W, 0, 0)
    N_eta: np.ndarray        # diagonal sign entries (0, 0, +N, -S)
    volume_node_coords: np.ndarray  # (n_vol, 2) of (xi, eta)
    face_node_coords: np.ndarray    # (n_face, 2) of (xi, eta)
    face_node_tags: tuple[str, ...]

    @property
    def n_xi(self) -> int:
        return self.op_xi.num_nodes

    @property
    def n_eta(self) -> int:
        return self.op_eta.num_nodes

    @property
    def n_vol(self) -> int:
        return self.n_xi * self.n_eta

    @property
    def n_face(self) -> int:
        return 2 * (self.n_xi + self.n_eta)

    def face_slices(self) -> dict[str, slice]:
        ne, nx = self.n_eta, self.n_xi
        return {
            "E": slice(0, ne),
            "W": slice(ne, 2 * ne),
            "N": slice(2 * ne, 2 * ne + nx),
            "S": slice(2 * ne + nx, 2 * ne + 2 * nx),
        }

    def reshape(self, U: np.ndarray) -> np.ndarray:
        """View a volume vector as an (n_xi, n_eta) array."""
        return np.asarray(U).reshape(self.n_xi, self.n_eta)

    def apply_dxi(self, U: np.ndarray) -> np.ndarray:
        return (self.op_xi.D @ self.reshape(U)).ravel()

    def apply_deta(self, U: np.ndarray) -> np.ndarray:
        return (self.reshape(U) @ self.op_eta.D.T).ravel()


def build_reference_ops(op_xi: Sbp1D, op_eta: Sbp1D) -> ReferenceElementOps:
    nx, ne = op_xi.num_nodes, op_eta.num_nodes
    I_xi, I_eta = np.eye(nx), np.eye(ne)

    P_hat = np.kron(op_xi.P, op_eta.P)
    Q_xi = np.kron(op_xi.Q, np.diag(op_eta.P))
    Q_eta = np.kron(np.diag(op_xi.P), op_eta.Q)

    E = np.vstack(
        [
            np.kron(op_xi.e_right[None, :], I_eta),  # East  (xi = 1)
            np.kron(op_xi.e_left[None, :], I_eta),   # West  (xi = 0)
            np.kron(I_xi, op_eta.e_right[None, :]),  # North (eta = 1)
            np.kron(I_xi, op_eta.e_left[None, :]),   # South (eta = 0)
        ]
    )
    P_face = np.concatenate([op_eta.P, op_eta.P, op_xi.P, op_xi.P])
    N_xi = np.concatenate([np.ones(ne), -np.ones(ne), np.zeros(nx), np.zeros(nx)])
    N_eta = np.concatenate([np.zeros(ne), np.zeros(ne), np.ones(nx), -np.ones(nx)])

    xi, eta = op_xi.quad.nodes, op_eta.quad.nodes
    vol = np.column_stack(
        [np.repeat(xi, ne), np.tile(eta, nx)]
    )
    face = np.vstack(
        [
            np.column_stack([np.ones(ne), eta]),
            np.column_stack([np.zeros(ne), eta]),
            np.column_stack([xi, np.ones(nx)]),
            np.column_stack([xi, np.zeros(nx)]),
        ]
    )
    tags = ("E",) * ne + ("W",) * ne + ("N",) * nx + ("S",) * nx

    return ReferenceElementOps(
        op_xi=op_xi,
        op_eta=op_eta,
        P_hat=P_hat,
        Q_xi=Q_xi,
        Q_eta=Q_eta,
        E_faces=E,
        P_hat_face=P_face,
        N_xi=N_xi,
        N_eta=N_eta,
        volume_node_coords=vol,
        face_node_coords=face,
        face_node_tags=tags,
    )
