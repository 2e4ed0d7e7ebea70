"""Physical-element operators on a curvilinearly mapped element.

Metric terms come either from the reference derivative operators applied to
the mapped coordinates (discrete mode, which makes the consistency proof
hold exactly) or from analytic derivatives of the map. The physical
undivided difference matrices carry a boundary penalty correction that
restores the SBP identity under inexact boundary projection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .tensor import ReferenceElementOps
from .varcoef import SbpBase, build_varcoef_q


class InvertedElementError(ValueError):
    pass


@dataclass(frozen=True)
class CurvilinearMap:
    """Smooth orientation-preserving map from [0,1]^2 to a physical element."""

    x: Callable[[np.ndarray, np.ndarray], np.ndarray]
    y: Callable[[np.ndarray, np.ndarray], np.ndarray]
    description: str = ""
    # Optional analytic partials, each (xi, eta) -> array.
    x_xi: Callable | None = None
    x_eta: Callable | None = None
    y_xi: Callable | None = None
    y_eta: Callable | None = None

    @property
    def has_analytic_jacobian(self) -> bool:
        return None not in (self.x_xi, self.x_eta, self.y_xi, self.y_eta)


def identity_map() -> CurvilinearMap:
    return CurvilinearMap(
        x=lambda xi, eta: np.asarray(xi, dtype=float).copy(),
        y=lambda xi, eta: np.asarray(eta, dtype=float).copy(),
        description="identity",
        x_xi=lambda xi, eta: np.ones_like(xi),
        x_eta=lambda xi, eta: np.zeros_like(xi),
        y_xi=lambda xi, eta: np.zeros_like(xi),
        y_eta=lambda xi, eta: np.ones_like(xi),
    )


def affine_map(x0: float, y0: float, x1: float, y1: float) -> CurvilinearMap:
    """Map [0,1]^2 to the axis-aligned rectangle [x0,x1] x [y0,y1]."""
    w, h = x1 - x0, y1 - y0
    return CurvilinearMap(
        x=lambda xi, eta: x0 + w * np.asarray(xi, dtype=float),
        y=lambda xi, eta: y0 + h * np.asarray(eta, dtype=float),
        description=f"affine[{x0},{x1}]x[{y0},{y1}]",
        x_xi=lambda xi, eta: np.full_like(np.asarray(xi, dtype=float), w),
        x_eta=lambda xi, eta: np.zeros_like(np.asarray(xi, dtype=float)),
        y_xi=lambda xi, eta: np.zeros_like(np.asarray(xi, dtype=float)),
        y_eta=lambda xi, eta: np.full_like(np.asarray(xi, dtype=float), h),
    )


def sine_perturbed_map(
    x0: float, y0: float, x1: float, y1: float, amplitude: float = 0.1
) -> CurvilinearMap:
    """Affine rectangle chart composed with the global sine perturbation

    x_phys = x + a sin(pi (y + 1)),  y_phys = y + a sin(pi (x + 1)),
    applied in the Cartesian parent coordinates.
    """
    w, h = x1 - x0, y1 - y0
    a = amplitude

    def xc(xi, eta):
        return x0 + w * np.asarray(xi, dtype=float)

    def yc(xi, eta):
        return y0 + h * np.asarray(eta, dtype=float)

    return CurvilinearMap(
        x=lambda xi, eta: xc(xi, eta) + a * np.sin(np.pi * (yc(xi, eta) + 1)),
        y=lambda xi, eta: yc(xi, eta) + a * np.sin(np.pi * (xc(xi, eta) + 1)),
        description=f"sine[{x0},{x1}]x[{y0},{y1}]",
        x_xi=lambda xi, eta: np.full_like(np.asarray(xi, dtype=float), w),
        x_eta=lambda xi, eta: a * np.pi * h * np.cos(np.pi * (yc(xi, eta) + 1)),
        y_xi=lambda xi, eta: a * np.pi * w * np.cos(np.pi * (xc(xi, eta) + 1)),
        y_eta=lambda xi, eta: np.full_like(np.asarray(eta, dtype=float), h),
    )


@dataclass(frozen=True)
class MetricData:
    mode: str  # "discrete" or "analytic"
    X: np.ndarray
    Y: np.ndarray
    X_xi: np.ndarray
    X_eta: np.ndarray
    Y_xi: np.ndarray
    Y_eta: np.ndarray
    J: np.ndarray
    x_xi_f: np.ndarray   # face metrics
    x_eta_f: np.ndarray
    y_xi_f: np.ndarray
    y_eta_f: np.ndarray
    j_face: np.ndarray


def compute_metrics(
    ref: ReferenceElementOps, cmap: CurvilinearMap, mode: str = "discrete"
) -> MetricData:
    if mode not in ("discrete", "analytic"):
        raise ValueError(f"unknown metric mode {mode!r}")
    xi = ref.volume_node_coords[:, 0]
    eta = ref.volume_node_coords[:, 1]
    X = cmap.x(xi, eta)
    Y = cmap.y(xi, eta)

    if mode == "discrete":
        X_xi = ref.apply_dxi(X)
        X_eta = ref.apply_deta(X)
        Y_xi = ref.apply_dxi(Y)
        Y_eta = ref.apply_deta(Y)
        x_xi_f = ref.E_faces @ X_xi
        x_eta_f = ref.E_faces @ X_eta
        y_xi_f = ref.E_faces @ Y_xi
        y_eta_f = ref.E_faces @ Y_eta
    else:
        if not cmap.has_analytic_jacobian:
            raise ValueError("analytic metric mode requires analytic partials on the map")
        X_xi = cmap.x_xi(xi, eta)
        X_eta = cmap.x_eta(xi, eta)
        Y_xi = cmap.y_xi(xi, eta)
        Y_eta = cmap.y_eta(xi, eta)
        fxi = ref.face_node_coords[:, 0]
        feta = ref.face_node_coords[:, 1]
        x_xi_f = cmap.x_xi(fxi, feta)
        x_eta_f = cmap.x_eta(fxi, feta)
        y_xi_f = cmap.y_xi(fxi, feta)
        y_eta_f = cmap.y_eta(fxi, feta)

    J = X_xi * Y_eta - Y_xi * X_eta
    if np.any(J <= 0):
        k = int(np.argmin(J))
        raise InvertedElementError(
            f"non-positive Jacobian {J[k]:.3e} at volume node {k} "
            f"(xi={xi[k]:.4f}, eta={eta[k]:.4f}) of map {cmap.description!r}"
        )

    # East/West faces stretch with the eta-tangent, North/South with xi.
    is_ew = np.array([t in ("E", "W") for t in ref.face_node_tags])
    j_face = np.where(
        is_ew,
        np.sqrt(x_eta_f**2 + y_eta_f**2),
        np.sqrt(x_xi_f**2 + y_xi_f**2),
    )
    if np.any(j_face <= 0):
        k = int(np.argmin(j_face))
        raise InvertedElementError(f"non-positive face stretching at face node {k}")

    return MetricData(
        mode=mode, X=X, Y=Y, X_xi=X_xi, X_eta=X_eta, Y_xi=Y_xi, Y_eta=Y_eta,
        J=J, x_xi_f=x_xi_f, x_eta_f=x_eta_f, y_xi_f=y_xi_f, y_eta_f=y_eta_f,
        j_face=j_face,
    )


@dataclass(frozen=True)
class PhysicalElementOps:
    ref_ops: ReferenceElementOps
    metrics: MetricData
    P_phys: np.ndarray  # J-weighted volume norm entries
    Q_x: np.ndarray
    Q_y: np.ndarray
    P_face: np.ndarray  # j-weighted face quadrature entries
    N_x: np.ndarray     # unit normal x-components on face nodes
    N_y: np.ndarray

    @property
    def n_vol(self) -> int:
        return self.ref_ops.n_vol


def naive_q_tilde(ref: ReferenceElementOps, metrics: MetricData) -> tuple[np.ndarray, np.ndarray]:
    """The uncorrected skew-symmetric-split matrices."""
    Yeta, Yxi = metrics.Y_eta, metrics.Y_xi
    Xxi, Xeta = metrics.X_xi, metrics.X_eta
    Qxi, Qeta = ref.Q_xi, ref.Q_eta
    Qt_x = 0.5 * (
        Qxi * Yeta[None, :] + Yeta[:, None] * Qxi
        - Qeta * Yxi[None, :] - Yxi[:, None] * Qeta
    )
    Qt_y = 0.5 * (
        Qeta * Xxi[None, :] + Xxi[:, None] * Qeta
        - Qxi * Xeta[None, :] - Xeta[:, None] * Qxi
    )
    return Qt_x, Qt_y


def build_physical_ops(ref: ReferenceElementOps, metrics: MetricData) -> PhysicalElementOps:
    if metrics.J.shape != (ref.n_vol,):
        raise ValueError("metric data does not match the reference operators")
    E = ref.E_faces
    Pf = ref.P_hat_face
    Nxi, Neta = ref.N_xi, ref.N_eta

    Qt_x, Qt_y = naive_q_tilde(ref, metrics)

    def corr(nf_a, vol_a, nf_b, vol_b, sign_a, sign_b):
        # (1/2) E^T Pf [ N_a (nf_a E - E vol_a) - N_b (nf_b E - E vol_b) ]
        term_a = Nxi[:, None] * (nf_a[:, None] * E - E * vol_a[None, :])
        term_b = Neta[:, None] * (nf_b[:, None] * E - E * vol_b[None, :])
        return 0.5 * E.T @ (Pf[:, None] * (sign_a * term_a + sign_b * term_b))

    Q_x = Qt_x + corr(metrics.y_eta_f, metrics.Y_eta, metrics.y_xi_f, metrics.Y_xi, 1.0, -1.0)
    Q_y = Qt_y + corr(metrics.x_eta_f, metrics.X_eta, metrics.x_xi_f, metrics.X_xi, -1.0, 1.0)

    j = metrics.j_face
    P_face = j * Pf
    N_x = (Nxi * metrics.y_eta_f - Neta * metrics.y_xi_f) / j
    N_y = (Neta * metrics.x_xi_f - Nxi * metrics.x_eta_f) / j

    return PhysicalElementOps(
        ref_ops=ref, metrics=metrics,
        P_phys=metrics.J * ref.P_hat,
        Q_x=Q_x, Q_y=Q_y, P_face=P_face, N_x=N_x, N_y=N_y,
    )


def build_physical_q_via_varcoef(
    ref: ReferenceElementOps, metrics: MetricData
) -> tuple[np.ndarray, np.ndarray]:
    """Independent assembly of Q_x, Q_y by composing four variable-coefficient
    corrected terms per direction, with surface overrides from the face metrics."""
    base_xi = SbpBase.from_reference(ref, "xi")
    base_eta = SbpBase.from_reference(ref, "eta")
    ones_v = np.ones(ref.n_vol)
    ones_f = np.ones(ref.n_face)

    def term(base, coeff_vol, coeff_face, coeff_first):
        if coeff_first:
            return build_varcoef_q(base, coeff_vol, ones_v, phi=coeff_face, psi=ones_f)
        return build_varcoef_q(base, ones_v, coeff_vol, phi=ones_f, psi=coeff_face)

    Q_x = 0.5 * (
        term(base_xi, metrics.Y_eta, metrics.y_eta_f, True).Q_corrected
        + term(base_xi, metrics.Y_eta, metrics.y_eta_f, False).Q_corrected
        - term(base_eta, metrics.Y_xi, metrics.y_xi_f, True).Q_corrected
        - term(base_eta, metrics.Y_xi, metrics.y_xi_f, False).Q_corrected
    )
    Q_y = 0.5 * (
        term(base_eta, metrics.X_xi, metrics.x_xi_f, True).Q_corrected
        + term(base_eta, metrics.X_xi, metrics.x_xi_f, False).Q_corrected
        - term(base_xi, metrics.X_eta, metrics.x_eta_f, True).Q_corrected
        - term(base_xi, metrics.X_eta, metrics.x_eta_f, False).Q_corrected
    )
    return Q_x, Q_y


def differentiate(ops: PhysicalElementOps, U: np.ndarray, direction: str) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.shape != (ops.n_vol,):
        raise ValueError("vector length does not match the element")
    if direction == "x":
        return (ops.Q_x @ U) / ops.P_phys
    if direction == "y":
        return (ops.Q_y @ U) / ops.P_phys
    raise ValueError(f"unknown direction {direction!r}")


def physical_sbp_residual(ops: PhysicalElementOps, direction: str) -> float:
    Q = ops.Q_x if direction == "x" else ops.Q_y
    N = ops.N_x if direction == "x" else ops.N_y
    E = ops.ref_ops.E_faces
    rhs = E.T @ (ops.P_face[:, None] * N[:, None] * E)
    return float(np.max(np.abs(Q + Q.T - rhs)))
