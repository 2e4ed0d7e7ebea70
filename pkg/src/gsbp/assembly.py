"""Global encapsulated SBP operators on a multi-element mesh.

The global undivided difference matrix splits into a block-diagonal part
(per-element operators with the interior-face boundary term removed) and a
skew-symmetric interface coupling built from inner-product preserving
projections. Both parts are stored in factored form: elements of equal
degree and family are batched into contiguous arrays and applied with
tensor contractions, and the coupling acts only on stacked face-node pools.
A dense assembly path exists as a test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coupling import FaceGrid, InterfaceProjection, build_l2_projection_pair, \
    ipp_residual, rescale_projection_curvilinear
from .curvilinear import CurvilinearMap, PhysicalElementOps, affine_map, \
    build_physical_ops, compute_metrics, sine_perturbed_map
from .mesh import FaceId, MeshTopology, face_segment
from .sbp1d import build_sbp_1d
from .tensor import FACE_TAGS, ReferenceElementOps, build_reference_ops
from .quadrature import gauss_legendre, gauss_lobatto

IPP_TOL = 1e-12

# Sign and volume-metric selection for the face correction terms of the
# physical Q in each direction: term = sign/2 * E_f^T w_f (ext*b - a) with
# b the face-metric weighted trace and a the trace of the weighted volume.
_FACE_METRIC = {
    "x": {"E": (+1.0, "Y_eta"), "W": (-1.0, "Y_eta"),
          "N": (-1.0, "Y_xi"), "S": (+1.0, "Y_xi")},
    "y": {"E": (-1.0, "X_eta"), "W": (+1.0, "X_eta"),
          "N": (+1.0, "X_xi"), "S": (-1.0, "X_xi")},
    # Fused divergence D_x + D_y: the x- and y-metric coefficients combine
    # into D_eta = Y_eta - X_eta and D_xi = Y_xi - X_xi, so the sum costs
    # the same as a single directional apply.
    "div": {"E": (+1.0, "D_eta"), "W": (-1.0, "D_eta"),
            "N": (-1.0, "D_xi"), "S": (+1.0, "D_xi")},
}
_FACE_METRIC_FACE = {
    "Y_eta": "y_eta_f", "Y_xi": "y_xi_f", "X_eta": "x_eta_f", "X_xi": "x_xi_f",
}


class AssemblyError(ValueError):
    pass


def build_element_map(rect, map_id: str) -> CurvilinearMap:
    x0, y0, x1, y1 = rect
    if map_id == "cartesian":
        return affine_map(x0, y0, x1, y1)
    if map_id == "sine":
        return sine_perturbed_map(x0, y0, x1, y1, amplitude=0.1)
    if map_id == "sine-minus":
        return sine_perturbed_map(x0, y0, x1, y1, amplitude=-0.1)
    raise ValueError(f"unknown map id {map_id!r}")


@dataclass
class _ElementGroup:
    """Elements sharing (degrees, family), batched for tensor-kernel apply."""

    ref: ReferenceElementOps
    elem_ids: np.ndarray          # (M,)
    vol_idx: np.ndarray           # (M, n_vol) global volume indices
    metrics_vol: dict             # name -> (M, n_vol)
    metrics_face: dict            # tag -> name -> (M, n_f) face-metric values
    ext_mask: dict                # tag -> (M,) 1.0 if exterior
    int_rows: dict                # tag -> (K,) row indices with interior face
    int_pool: dict                # tag -> (K, n_f) interior pool indices
    ext_rows: dict                # tag -> (K,) row indices with exterior face
    ext_pool: dict                # tag -> (K, n_f) exterior pool indices

    @property
    def size(self) -> int:
        return len(self.elem_ids)


@dataclass
class _PairGroup:
    """Interface coupling blocks of equal shape, stacked."""

    B: dict                       # direction -> (K, n_a, n_b)
    recv_idx: np.ndarray          # (K, n_a) interior pool indices
    send_idx: np.ndarray          # (K, n_b)


@dataclass
class GlobalOperator:
    topology: MeshTopology
    element_ops: list[PhysicalElementOps]
    groups: list[_ElementGroup]
    vol_offsets: np.ndarray       # (M+1,)
    P_global: np.ndarray
    # Interior interface pool (stacked face nodes, deterministic order).
    interior_faces: list[FaceId]
    interior_slices: dict
    P_i: np.ndarray
    N_i: dict                     # direction -> pool normals
    # Exterior boundary pool.
    exterior_faces: list[FaceId]
    exterior_slices: dict
    P_e: np.ndarray
    N_e: dict
    x_e: np.ndarray               # physical coordinates of exterior face nodes
    y_e: np.ndarray
    pair_groups: list[_PairGroup] = field(default_factory=list)
    projections: dict = field(default_factory=dict)
    last_apply_counts: dict = field(default_factory=dict)

    @property
    def n_total(self) -> int:
        return int(self.vol_offsets[-1])

    @property
    def n_interior(self) -> int:
        return len(self.P_i)

    @property
    def n_exterior(self) -> int:
        return len(self.P_e)


def _face_values(ref: ReferenceElementOps, V: np.ndarray, tag: str) -> np.ndarray:
    """Trace of batched volume data V (M, n_xi, n_eta) on one face."""
    ox, oe = ref.op_xi, ref.op_eta
    if tag == "E":
        return np.einsum("a,maj->mj", ox.e_right, V)
    if tag == "W":
        return np.einsum("a,maj->mj", ox.e_left, V)
    if tag == "N":
        return V @ oe.e_right
    return V @ oe.e_left


def _face_adjoint(ref: ReferenceElementOps, w: np.ndarray, tag: str) -> np.ndarray:
    """Adjoint of _face_values: lift face data w back to the volume."""
    ox, oe = ref.op_xi, ref.op_eta
    if tag == "E":
        return np.einsum("a,mj->maj", ox.e_right, w)
    if tag == "W":
        return np.einsum("a,mj->maj", ox.e_left, w)
    if tag == "N":
        return np.einsum("ma,j->maj", w, oe.e_right)
    return np.einsum("ma,j->maj", w, oe.e_left)


def _face_weights(ref: ReferenceElementOps, tag: str) -> np.ndarray:
    return ref.op_eta.P if tag in ("E", "W") else ref.op_xi.P


def _element_quads(spec):
    make = gauss_legendre if spec.family == "legendre" else gauss_lobatto
    return make(spec.degrees[0] + 1), make(spec.degrees[1] + 1)


def build_element_operators(
    topology: MeshTopology, metric_mode: str = "discrete"
) -> tuple[list[PhysicalElementOps], list[CurvilinearMap], dict]:
    """Physical operators and coordinate maps for every element.

    Reference operators are shared across elements of equal degrees and
    family; the returned dict caches them keyed by (degrees, family).
    """
    ref_cache: dict = {}
    ops, maps = [], []
    for spec in topology.elements:
        key = (spec.degrees, spec.family)
        if key not in ref_cache:
            qx, qe = _element_quads(spec)
            ref_cache[key] = build_reference_ops(build_sbp_1d(qx), build_sbp_1d(qe))
        ref = ref_cache[key]
        cmap = build_element_map(spec.rect, spec.map_id)
        metrics = compute_metrics(ref, cmap, metric_mode)
        ops.append(build_physical_ops(ref, metrics))
        maps.append(cmap)
    return ops, maps, ref_cache


def build_interface_projections(
    topology: MeshTopology, element_ops: list[PhysicalElementOps]
) -> dict:
    """IPP projections for every ordered interface pair, keyed (to, from).

    Operators are first built against the Cartesian (parent-domain) face
    quadratures, then rescaled by the physical-to-parent face stretching so
    the IPP condition holds with respect to the physical face quadratures.
    """
    projections: dict = {}

    def face_grid(face: FaceId) -> FaceGrid:
        elem, tag = face
        ops = element_ops[elem]
        quad = ops.ref_ops.op_eta.quad if tag in ("E", "W") else ops.ref_ops.op_xi.quad
        _, _, lo, hi = face_segment(topology.elements[elem], tag)
        return FaceGrid(face=face, quad=quad, extent=(lo, hi))

    def j_rel(face: FaceId, grid: FaceGrid) -> np.ndarray:
        elem, tag = face
        ops = element_ops[elem]
        sl = ops.ref_ops.face_slices()[tag]
        return ops.P_face[sl] / grid.weights

    for p in topology.interface_pairs:
        key = (p.face_a, p.face_b)
        if key in projections:
            continue
        grid_a, grid_b = face_grid(p.face_a), face_grid(p.face_b)
        proj_ab, proj_ba = build_l2_projection_pair(grid_a, grid_b, p.overlap_a)
        proj_ab, proj_ba = rescale_projection_curvilinear(
            proj_ab, proj_ba, j_rel(p.face_a, grid_a), j_rel(p.face_b, grid_b)
        )
        projections[key] = proj_ab
        projections[(p.face_b, p.face_a)] = proj_ba
    return projections


def build_global_operator(
    topology: MeshTopology, metric_mode: str = "discrete"
) -> GlobalOperator:
    """One-call construction: element operators, projections, assembly."""
    element_ops, maps, _ = build_element_operators(topology, metric_mode)
    projections = build_interface_projections(topology, element_ops)
    return assemble_global(topology, element_ops, projections, maps=maps)


def assemble_global(
    topology: MeshTopology,
    element_ops: list[PhysicalElementOps],
    projections: dict,
    maps: list[CurvilinearMap] | None = None,
) -> GlobalOperator:
    topology.validate()
    if len(element_ops) != topology.num_elements:
        raise AssemblyError("element operator list does not match the mesh")

    M = topology.num_elements
    vol_offsets = np.zeros(M + 1, dtype=int)
    for m, ops in enumerate(element_ops):
        vol_offsets[m + 1] = vol_offsets[m] + ops.n_vol
    P_global = np.concatenate([ops.P_phys for ops in element_ops])

    exterior = set(topology.exterior_faces)
    interior_faces, exterior_faces = [], []
    for m in range(M):
        for tag in FACE_TAGS:
            (exterior_faces if (m, tag) in exterior else interior_faces).append((m, tag))

    def build_pool(faces):
        slices, P, Nx, Ny, xs, ys = {}, [], [], [], [], []
        pos = 0
        for face in faces:
            m, tag = face
            ops = element_ops[m]
            sl = ops.ref_ops.face_slices()[tag]
            n_f = sl.stop - sl.start
            slices[face] = slice(pos, pos + n_f)
            P.append(ops.P_face[sl])
            Nx.append(ops.N_x[sl])
            Ny.append(ops.N_y[sl])
            coords = ops.ref_ops.face_node_coords[sl]
            if maps is not None:
                xs.append(maps[m].x(coords[:, 0], coords[:, 1]))
                ys.append(maps[m].y(coords[:, 0], coords[:, 1]))
            else:
                E_f = ops.ref_ops.E_faces[sl]
                xs.append(E_f @ ops.metrics.X)
                ys.append(E_f @ ops.metrics.Y)
            pos += n_f
        cat = lambda arrs: np.concatenate(arrs) if arrs else np.zeros(0)
        return slices, cat(P), {"x": cat(Nx), "y": cat(Ny)}, cat(xs), cat(ys)

    int_slices, P_i, N_i, _, _ = build_pool(interior_faces)
    ext_slices, P_e, N_e, x_e, y_e = build_pool(exterior_faces)

    # Verify every interior face pairing has a projection satisfying IPP.
    for p in topology.interface_pairs:
        proj = projections.get((p.face_a, p.face_b))
        rev = projections.get((p.face_b, p.face_a))
        if proj is None or rev is None:
            raise AssemblyError(
                f"interior face {p.face_a} lacks a projection from {p.face_b}"
            )
        res = ipp_residual(proj, rev)
        if res > IPP_TOL:
            raise AssemblyError(
                f"projection pair {p.face_a}<->{p.face_b} violates the IPP "
                f"condition (residual {res:.3e} > {IPP_TOL:.0e})"
            )

    # Batch elements by (degrees, family).
    by_key: dict = {}
    for m, spec in enumerate(topology.elements):
        by_key.setdefault((spec.degrees, spec.family), []).append(m)

    groups = []
    for key in sorted(by_key, key=str):
        ids = np.array(by_key[key], dtype=int)
        ref = element_ops[ids[0]].ref_ops
        nv = ref.n_vol
        vol_idx = vol_offsets[ids][:, None] + np.arange(nv)[None, :]
        mv = {
            name: np.stack([getattr(element_ops[m].metrics, name) for m in ids])
            for name in ("Y_eta", "Y_xi", "X_xi", "X_eta")
        }
        mv["D_eta"] = mv["Y_eta"] - mv["X_eta"]
        mv["D_xi"] = mv["Y_xi"] - mv["X_xi"]
        face_sl = ref.face_slices()
        mf, ext_mask = {}, {}
        int_rows, int_pool, ext_rows, ext_pool = {}, {}, {}, {}
        for tag in FACE_TAGS:
            sl = face_sl[tag]
            mf[tag] = {
                name: np.stack(
                    [getattr(element_ops[m].metrics, _FACE_METRIC_FACE[name])[sl]
                     for m in ids]
                )
                for name in ("Y_eta", "Y_xi", "X_xi", "X_eta")
            }
            mf[tag]["D_eta"] = mf[tag]["Y_eta"] - mf[tag]["X_eta"]
            mf[tag]["D_xi"] = mf[tag]["Y_xi"] - mf[tag]["X_xi"]
            mask = np.array(
                [0.0 if (m, tag) in exterior else 1.0 for m in ids]
            )
            ext_mask[tag] = 1.0 - mask
            i_rows = [k for k, m in enumerate(ids) if (m, tag) not in exterior]
            e_rows = [k for k, m in enumerate(ids) if (m, tag) in exterior]
            int_rows[tag] = np.array(i_rows, dtype=int)
            ext_rows[tag] = np.array(e_rows, dtype=int)
            def pool_rows(rows, slices):
                if not rows:
                    return np.zeros((0, sl.stop - sl.start), dtype=int)
                return np.stack(
                    [np.arange(slices[(ids[k], tag)].start,
                               slices[(ids[k], tag)].stop) for k in rows]
                )
            int_pool[tag] = pool_rows(i_rows, int_slices)
            ext_pool[tag] = pool_rows(e_rows, ext_slices)
        groups.append(
            _ElementGroup(
                ref=ref, elem_ids=ids, vol_idx=vol_idx, metrics_vol=mv,
                metrics_face=mf, ext_mask=ext_mask, int_rows=int_rows,
                int_pool=int_pool, ext_rows=ext_rows, ext_pool=ext_pool,
            )
        )

    # Interface coupling blocks B = (1/2)(N_a I_ba - I_ba N_b), stacked by shape.
    by_shape: dict = {}
    for p in topology.interface_pairs:
        proj = projections[(p.face_a, p.face_b)]
        sl_a, sl_b = int_slices[p.face_a], int_slices[p.face_b]
        B = {
            d: 0.5 * (N_i[d][sl_a][:, None] * proj.I - proj.I * N_i[d][sl_b][None, :])
            for d in ("x", "y")
        }
        B["div"] = B["x"] + B["y"]
        by_shape.setdefault(proj.I.shape, []).append(
            (B, np.arange(sl_a.start, sl_a.stop), np.arange(sl_b.start, sl_b.stop))
        )
    pair_groups = []
    for shape in sorted(by_shape):
        items = by_shape[shape]
        pair_groups.append(
            _PairGroup(
                B={d: np.stack([it[0][d] for it in items])
                   for d in ("x", "y", "div")},
                recv_idx=np.stack([it[1] for it in items]),
                send_idx=np.stack([it[2] for it in items]),
            )
        )

    return GlobalOperator(
        topology=topology, element_ops=element_ops, groups=groups,
        vol_offsets=vol_offsets, P_global=P_global,
        interior_faces=interior_faces, interior_slices=int_slices,
        P_i=P_i, N_i=N_i,
        exterior_faces=exterior_faces, exterior_slices=ext_slices,
        P_e=P_e, N_e=N_e, x_e=x_e, y_e=y_e,
        pair_groups=pair_groups, projections=projections,
    )


def _group_qbb_apply(g: _ElementGroup, V: np.ndarray, direction: str,
                     traces: dict, counts: dict) -> np.ndarray:
    """Block-diagonal Q_barbar applied to batched volume data V (M, nx, ne).

    traces must hold the plain face values of V per tag (shared between
    directions and with the interface gather).
    """
    ref = g.ref
    Q1x, Q1e = ref.op_xi.Q, ref.op_eta.Q
    Px, Pe = ref.op_xi.P, ref.op_eta.P
    if direction == "x":
        c_main, c_cross = g.metrics_vol["Y_eta"], g.metrics_vol["Y_xi"]
    elif direction == "div":
        c_main, c_cross = g.metrics_vol["D_eta"], g.metrics_vol["D_xi"]
    else:
        c_main, c_cross = g.metrics_vol["X_xi"], g.metrics_vol["X_eta"]
    shape = (g.size, ref.n_xi, ref.n_eta)
    Cm = c_main.reshape(shape)
    Cc = c_cross.reshape(shape)

    def qxi(A):
        return np.matmul(Q1x, A) * Pe[None, None, :]

    def qeta(A):
        return Px[None, :, None] * (A @ Q1e.T)

    if direction in ("x", "div"):
        out = 0.5 * (qxi(Cm * V) + Cm * qxi(V) - qeta(Cc * V) - Cc * qeta(V))
    else:
        out = 0.5 * (qeta(Cm * V) + Cm * qeta(V) - qxi(Cc * V) - Cc * qxi(V))
    counts["volume"] = counts.get("volume", 0) + 4 * g.size * ref.n_vol * (
        ref.n_xi + ref.n_eta
    )

    for tag in FACE_TAGS:
        sign, name = _FACE_METRIC[direction][tag]
        w_f = _face_weights(ref, tag)
        v = traces[tag]
        # Trace of the metric-weighted volume and metric-weighted trace.
        mV = g.metrics_vol[name].reshape(shape) * V
        a = _face_values(ref, mV, tag)
        b = g.metrics_face[tag][name] * v
        term = 0.5 * sign * w_f[None, :] * (g.ext_mask[tag][:, None] * b - a)
        out += _face_adjoint(ref, term, tag)
        counts["face"] = counts.get("face", 0) + 2 * g.size * len(w_f) * (
            ref.n_xi if tag in ("E", "W") else ref.n_eta
        )
    return out


def apply_divergence(op: GlobalOperator, U: np.ndarray) -> np.ndarray:
    """Fused (D_x + D_y) U with shared gather/trace passes."""
    return apply_global(op, "div", U)


def apply_global(op: GlobalOperator, direction: str, U: np.ndarray) -> np.ndarray:
    """Matrix-free derivative D U = P^{-1}[Q_barbar U + (1/2)(E^i)^T P^i N* E^i U]."""
    if direction not in ("x", "y", "div"):
        raise ValueError(f"unknown direction {direction!r}")
    U = np.asarray(U, dtype=float)
    if U.shape != (op.n_total,):
        raise ValueError(
            f"vector length {U.shape} does not match {op.n_total} volume nodes"
        )
    counts: dict = {}
    out = np.zeros_like(U)

    # Pass 1: batched volume views, traces, interior-face value pool.
    views, all_traces = [], []
    v_pool = np.zeros(op.n_interior)
    for g in op.groups:
        V = U[g.vol_idx].reshape(g.size, g.ref.n_xi, g.ref.n_eta)
        traces = {tag: _face_values(g.ref, V, tag) for tag in FACE_TAGS}
        for tag in FACE_TAGS:
            rows = g.int_rows[tag]
            if len(rows):
                v_pool[g.int_pool[tag]] = traces[tag][rows]
        views.append(V)
        all_traces.append(traces)

    # Pass 2: skew-symmetric coupling on the interface pool.
    w_pool = np.zeros(op.n_interior)
    for pg in op.pair_groups:
        w = np.matmul(pg.B[direction], v_pool[pg.send_idx][:, :, None])[:, :, 0]
        np.add.at(w_pool, pg.recv_idx, w)
        counts["coupling"] = counts.get("coupling", 0) + pg.B[direction][0].size * len(w)
    w_pool *= 0.5 * op.P_i

    # Pass 3: per-group block-diagonal part plus the lifted coupling.
    for g, V, traces in zip(op.groups, views, all_traces):
        acc = _group_qbb_apply(g, V, direction, traces, counts)
        for tag in FACE_TAGS:
            rows = g.int_rows[tag]
            if len(rows):
                lifted = _face_adjoint(g.ref, w_pool[g.int_pool[tag]], tag)
                acc[rows] += lifted
        out[g.vol_idx] = acc.reshape(g.size, -1)

    op.last_apply_counts = counts
    return out / op.P_global


def restrict_exterior(op: GlobalOperator, U: np.ndarray) -> np.ndarray:
    """E^e U: traces of a global volume vector on all exterior face nodes."""
    U = np.asarray(U, dtype=float)
    if U.shape != (op.n_total,):
        raise ValueError("vector length does not match the mesh")
    v = np.zeros(op.n_exterior)
    for g in op.groups:
        V = U[g.vol_idx].reshape(g.size, g.ref.n_xi, g.ref.n_eta)
        for tag in FACE_TAGS:
            rows = g.ext_rows[tag]
            if len(rows):
                v[g.ext_pool[tag]] = _face_values(g.ref, V, tag)[rows]
    return v


def lift_exterior(op: GlobalOperator, w: np.ndarray) -> np.ndarray:
    """(E^e)^T w: adjoint of restrict_exterior."""
    w = np.asarray(w, dtype=float)
    if w.shape != (op.n_exterior,):
        raise ValueError("vector length does not match the exterior pool")
    out = np.zeros(op.n_total)
    for g in op.groups:
        acc = np.zeros((g.size, g.ref.n_xi, g.ref.n_eta))
        for tag in FACE_TAGS:
            rows = g.ext_rows[tag]
            if len(rows):
                acc[rows] += _face_adjoint(g.ref, w[g.ext_pool[tag]], tag)
        out[g.vol_idx] += acc.reshape(g.size, -1)
    return out


def restrict_interior(op: GlobalOperator, U: np.ndarray) -> np.ndarray:
    """E^i U: traces on all interior interface nodes."""
    U = np.asarray(U, dtype=float)
    v = np.zeros(op.n_interior)
    for g in op.groups:
        V = U[g.vol_idx].reshape(g.size, g.ref.n_xi, g.ref.n_eta)
        for tag in FACE_TAGS:
            rows = g.int_rows[tag]
            if len(rows):
                v[g.int_pool[tag]] = _face_values(g.ref, V, tag)[rows]
    return v


def global_energy_rate(op: GlobalOperator, U: np.ndarray,
                       direction: str = "x") -> float:
    """2 (U, D U)_P, which the SBP property reduces to a boundary quadrature."""
    dU = apply_global(op, direction, U)
    return float(2.0 * np.dot(U, op.P_global * dU))


def boundary_energy_rate(op: GlobalOperator, U: np.ndarray,
                         direction: str = "x") -> float:
    """The boundary side (E^e U)^T P^e N^e (E^e U) of the energy identity."""
    v = restrict_exterior(op, U)
    return float(np.dot(v, op.P_e * op.N_e[direction] * v))


# ---------------------------------------------------------------------------
# Dense oracle (desk-scale meshes only)
# ---------------------------------------------------------------------------


def dense_restriction(op: GlobalOperator, which: str) -> np.ndarray:
    """Dense E^i (which='i') or E^e (which='e')."""
    faces = op.interior_faces if which == "i" else op.exterior_faces
    slices = op.interior_slices if which == "i" else op.exterior_slices
    n_pool = op.n_interior if which == "i" else op.n_exterior
    E = np.zeros((n_pool, op.n_total))
    for face in faces:
        m, tag = face
        ops = op.element_ops[m]
        sl_f = ops.ref_ops.face_slices()[tag]
        vs = slice(op.vol_offsets[m], op.vol_offsets[m + 1])
        E[slices[face], vs] = ops.ref_ops.E_faces[sl_f]
    return E


def dense_n_star(op: GlobalOperator, direction: str) -> np.ndarray:
    """N* assembled densely on the interior pool."""
    N = np.zeros((op.n_interior, op.n_interior))
    for p in op.topology.interface_pairs:
        proj = op.projections[(p.face_a, p.face_b)]
        sl_a, sl_b = op.interior_slices[p.face_a], op.interior_slices[p.face_b]
        Nd = op.N_i[direction]
        N[sl_a, sl_b] += 0.5 * (
            Nd[sl_a][:, None] * proj.I - proj.I * Nd[sl_b][None, :]
        )
    return N


def dense_q_barbar(op: GlobalOperator, direction: str) -> np.ndarray:
    """Block-diagonal Q with the interior-face boundary term removed."""
    Q = np.zeros((op.n_total, op.n_total))
    for m, ops in enumerate(op.element_ops):
        vs = slice(op.vol_offsets[m], op.vol_offsets[m + 1])
        Qm = (ops.Q_x if direction == "x" else ops.Q_y).copy()
        Nd = ops.N_x if direction == "x" else ops.N_y
        for tag in FACE_TAGS:
            if (m, tag) in op.interior_slices:
                sl_f = ops.ref_ops.face_slices()[tag]
                E_f = ops.ref_ops.E_faces[sl_f]
                Qm -= 0.5 * E_f.T @ (
                    (ops.P_face[sl_f] * Nd[sl_f])[:, None] * E_f
                )
        Q[vs, vs] = Qm
    return Q


def dense_q(op: GlobalOperator, direction: str) -> np.ndarray:
    """Dense global Q = Q_barbar + (1/2)(E^i)^T P^i N* E^i."""
    E_i = dense_restriction(op, "i")
    N_star = dense_n_star(op, direction)
    return dense_q_barbar(op, direction) + 0.5 * E_i.T @ (
        op.P_i[:, None] * (N_star @ E_i)
    )


def global_sbp_residual(op: GlobalOperator, direction: str) -> float:
    """Max residual of Q + Q^T = (E^e)^T P^e N^e E^e (dense check)."""
    Q = dense_q(op, direction)
    E_e = dense_restriction(op, "e")
    rhs = E_e.T @ ((op.P_e * op.N_e[direction])[:, None] * E_e)
    return float(np.max(np.abs(Q + Q.T - rhs)))


def skew_symmetry_residual(op: GlobalOperator, direction: str) -> float:
    """Max residual of P^i N* + (P^i N*)^T = 0 (dense check)."""
    if op.n_interior == 0:
        return 0.0
    A = op.P_i[:, None] * dense_n_star(op, direction)
    return float(np.max(np.abs(A + A.T)))


def write_audit_report(op: GlobalOperator, path) -> None:
    """Structured residual report for golden comparison in CI."""
    rng = np.random.default_rng(0)
    U = rng.standard_normal(op.n_total)
    lines = [
        "gsbp operator audit",
        f"elements {op.topology.num_elements}",
        f"volume_nodes {op.n_total}",
        f"interior_face_nodes {op.n_interior}",
        f"exterior_face_nodes {op.n_exterior}",
    ]
    for d in ("x", "y"):
        dense = dense_q(op, d) @ U / op.P_global
        free = apply_global(op, d, U)
        lines += [
            f"skew_symmetry_{d} {skew_symmetry_residual(op, d):.3e}",
            f"global_sbp_{d} {global_sbp_residual(op, d):.3e}",
            f"matrix_free_vs_dense_{d} {np.max(np.abs(dense - free)):.3e}",
            f"energy_identity_{d} "
            f"{abs(global_energy_rate(op, U, d) - boundary_energy_rate(op, U, d)):.3e}",
        ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
