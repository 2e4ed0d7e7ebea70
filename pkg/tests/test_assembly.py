import numpy as np
import pytest

from gsbp.assembly import (
    AssemblyError,
    apply_global,
    assemble_global,
    boundary_energy_rate,
    build_element_operators,
    build_global_operator,
    build_interface_projections,
    dense_n_star,
    dense_q,
    dense_restriction,
    global_energy_rate,
    global_sbp_residual,
    lift_exterior,
    restrict_exterior,
    skew_symmetry_residual,
    write_audit_report,
)
from gsbp.curvilinear import differentiate
from gsbp.mesh import canonical_mesh_fig1, single_element_mesh, two_element_mesh


def meshes_for_fuzz(degree, family, map_id="cartesian"):
    return [
        single_element_mesh(degree=degree, family=family, map_id=map_id),
        two_element_mesh(conforming=True, degree=degree, family=family, map_id=map_id),
        two_element_mesh(conforming=False, degree=degree, family=family, map_id=map_id),
    ]


def test_single_element_reduces_to_element_operator():
    topo = single_element_mesh(degree=4)
    op = build_global_operator(topo)
    assert op.n_interior == 0
    assert not op.pair_groups
    elem = op.element_ops[0]
    np.testing.assert_allclose(dense_q(op, "x"), elem.Q_x, atol=0)
    rng = np.random.default_rng(3)
    U = rng.standard_normal(op.n_total)
    np.testing.assert_allclose(
        apply_global(op, "x", U), differentiate(elem, U, "x"), atol=1e-13
    )


def test_two_conforming_elements_differentiate_linears():
    topo = two_element_mesh(conforming=True, degree=3)
    op = build_global_operator(topo)
    X = np.concatenate([e.metrics.X for e in op.element_ops])
    Y = np.concatenate([e.metrics.Y for e in op.element_ops])
    np.testing.assert_allclose(apply_global(op, "x", X), 1.0, atol=1e-10)
    np.testing.assert_allclose(apply_global(op, "y", Y), 1.0, atol=1e-10)
    np.testing.assert_allclose(apply_global(op, "x", Y), 0.0, atol=1e-10)


@pytest.mark.parametrize("family", ["legendre", "lobatto"])
@pytest.mark.parametrize("degree", [2, 3, 4, 5])
def test_invariants_small_meshes(family, degree):
    rng = np.random.default_rng(degree)
    for topo in meshes_for_fuzz(degree, family):
        op = build_global_operator(topo)
        U = rng.standard_normal(op.n_total)
        for d in ("x", "y"):
            assert skew_symmetry_residual(op, d) <= 1e-12
            assert global_sbp_residual(op, d) <= 1e-11
            dense = dense_q(op, d) @ U / op.P_global
            np.testing.assert_allclose(apply_global(op, d, U), dense, atol=1e-12)


@pytest.mark.parametrize("family", ["legendre", "lobatto"])
@pytest.mark.parametrize("degree", [2, 3, 4, 5])
def test_invariants_fig1_level1(family, degree):
    topo = canonical_mesh_fig1(1, degree=degree, family=family)
    op = build_global_operator(topo)
    rng = np.random.default_rng(7)
    U = rng.standard_normal(op.n_total)
    for d in ("x", "y"):
        assert skew_symmetry_residual(op, d) <= 1e-12
        assert global_sbp_residual(op, d) <= 1e-11
        dense = dense_q(op, d) @ U / op.P_global
        np.testing.assert_allclose(apply_global(op, d, U), dense, atol=1e-12)


@pytest.mark.parametrize("family", ["legendre", "lobatto"])
def test_invariants_fig1_level2(family):
    topo = canonical_mesh_fig1(2, degree=2, family=family)
    op = build_global_operator(topo)
    rng = np.random.default_rng(11)
    U = rng.standard_normal(op.n_total)
    for d in ("x", "y"):
        assert skew_symmetry_residual(op, d) <= 1e-12
        assert global_sbp_residual(op, d) <= 1e-11
        dense = dense_q(op, d) @ U / op.P_global
        np.testing.assert_allclose(apply_global(op, d, U), dense, atol=1e-12)


def test_curvilinear_mesh_invariants():
    topo = canonical_mesh_fig1(1, degree=3, family="legendre", map_id="sine")
    op = build_global_operator(topo)
    rng = np.random.default_rng(13)
    U = rng.standard_normal(op.n_total)
    for d in ("x", "y"):
        assert skew_symmetry_residual(op, d) <= 1e-12
        assert global_sbp_residual(op, d) <= 1e-11
        dense = dense_q(op, d) @ U / op.P_global
        np.testing.assert_allclose(apply_global(op, d, U), dense, atol=1e-12)


def test_free_stream_on_cartesian_nonconforming():
    topo = canonical_mesh_fig1(1, degree=4)
    op = build_global_operator(topo)
    ones = np.ones(op.n_total)
    assert np.max(np.abs(apply_global(op, "x", ones))) <= 1e-11
    assert np.max(np.abs(apply_global(op, "y", ones))) <= 1e-11


def test_energy_rate_identity():
    rng = np.random.default_rng(5)
    for map_id in ("cartesian", "sine"):
        topo = canonical_mesh_fig1(1, degree=3, map_id=map_id)
        op = build_global_operator(topo)
        U = rng.standard_normal(op.n_total)
        for d in ("x", "y"):
            scale = max(1.0, abs(boundary_energy_rate(op, U, d)))
            assert abs(
                global_energy_rate(op, U, d) - boundary_energy_rate(op, U, d)
            ) <= 1e-10 * scale
    topo = single_element_mesh(degree=3)
    op = build_global_operator(topo)
    assert global_energy_rate(op, np.zeros(op.n_total)) == 0.0


def test_exterior_restriction_and_adjoint():
    topo = two_element_mesh(conforming=False, degree=3)
    op = build_global_operator(topo)
    E_e = dense_restriction(op, "e")
    rng = np.random.default_rng(2)
    U = rng.standard_normal(op.n_total)
    w = rng.standard_normal(op.n_exterior)
    np.testing.assert_allclose(restrict_exterior(op, U), E_e @ U, atol=1e-13)
    np.testing.assert_allclose(lift_exterior(op, w), E_e.T @ w, atol=1e-13)


def test_missing_projection_rejected():
    topo = two_element_mesh(conforming=True, degree=3)
    element_ops, maps, _ = build_element_operators(topo)
    with pytest.raises(AssemblyError, match="lacks a projection"):
        assemble_global(topo, element_ops, {}, maps=maps)


def test_ipp_violation_rejected_with_residual():
    topo = two_element_mesh(conforming=True, degree=3)
    element_ops, maps, _ = build_element_operators(topo)
    projections = build_interface_projections(topo, element_ops)
    key = next(iter(projections))
    import dataclasses

    bad = dataclasses.replace(projections[key], I=projections[key].I + 1e-6)
    projections[key] = bad
    with pytest.raises(AssemblyError, match="residual"):
        assemble_global(topo, element_ops, projections, maps=maps)


def test_dimension_mismatch_errors():
    op = build_global_operator(single_element_mesh(degree=2))
    with pytest.raises(ValueError):
        apply_global(op, "x", np.zeros(op.n_total + 1))
    with pytest.raises(ValueError):
        apply_global(op, "z", np.zeros(op.n_total))


def test_operation_count_scaling():
    # Volume work scales with (total nodes x 1D bandwidth); coupling work
    # with (interface nodes x projection stencil) only.
    ops_by_level = {}
    for level in (1, 2):
        topo = canonical_mesh_fig1(level, degree=3)
        op = build_global_operator(topo)
        apply_global(op, "x", np.zeros(op.n_total))
        ops_by_level[level] = (op, dict(op.last_apply_counts))
    for level, (op, counts) in ops_by_level.items():
        n_1d = 2 * (3 + 1)
        assert counts["volume"] == 4 * op.n_total * n_1d
        assert counts["coupling"] <= op.n_interior * (3 + 1) * 4
    # Quadrupling the element count quadruples the volume work.
    assert ops_by_level[2][1]["volume"] == 4 * ops_by_level[1][1]["volume"]


def test_n_star_matches_pool_blocks():
    topo = canonical_mesh_fig1(1, degree=2)
    op = build_global_operator(topo)
    for d in ("x", "y"):
        A = op.P_i[:, None] * dense_n_star(op, d)
        np.testing.assert_allclose(A, -A.T, atol=1e-12)


def test_audit_report(tmp_path):
    topo = two_element_mesh(conforming=False, degree=3)
    op = build_global_operator(topo)
    path = tmp_path / "audit.txt"
    write_audit_report(op, path)
    text = path.read_text()
    assert "global_sbp_x" in text
    for line in text.splitlines():
        parts = line.split()
        if parts[0].startswith(("skew", "global", "matrix", "energy")):
            assert float(parts[1]) <= 1e-10
