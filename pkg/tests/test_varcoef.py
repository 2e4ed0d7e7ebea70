import numpy as np
import pytest

from gsbp.quadrature import gauss_legendre, gauss_lobatto
from gsbp.sbp1d import build_sbp_1d
from gsbp.tensor import build_reference_ops
from gsbp.varcoef import (
    SbpBase,
    build_varcoef_q,
    check_inner_product_mimicry,
    naive_inner_product_residual,
    varcoef_identity_residual,
)


def make_base(family, n, direction="xi"):
    make = gauss_legendre if family == "legendre" else gauss_lobatto
    op = build_sbp_1d(make(n))
    ref = build_reference_ops(op, op)
    return SbpBase.from_reference(ref, direction)


def test_constant_coefficients_leave_q_unchanged():
    base = make_base("legendre", 4)
    ones = np.ones(base.P.size)
    op = build_varcoef_q(base, ones, ones)
    np.testing.assert_allclose(op.Q_corrected, base.Q, atol=1e-14)


def test_proposition_identity_random_coefficients():
    base = make_base("legendre", 5)
    rng = np.random.default_rng(11)
    for _ in range(10):
        Phi = rng.standard_normal(base.P.size)
        Psi = rng.standard_normal(base.P.size)
        fw = build_varcoef_q(base, Phi, Psi)
        bw = build_varcoef_q(base, Psi, Phi)
        assert varcoef_identity_residual(fw, bw) <= 1e-12


def test_lobatto_correction_vanishes():
    base = make_base("lobatto", 4)
    rng = np.random.default_rng(5)
    Phi = rng.standard_normal(base.P.size)
    Psi = rng.standard_normal(base.P.size)
    op = build_varcoef_q(base, Phi, Psi)
    naive = Psi[:, None] * base.Q * Phi[None, :]
    # E selects unit rows, so phi E - E Phi = 0 and the correction is zero.
    np.testing.assert_allclose(op.Q_corrected, naive, atol=1e-13)


def test_inner_product_mimicry_constants():
    base = make_base("legendre", 4)
    ones = np.ones(base.P.size)
    assert check_inner_product_mimicry(base, ones, ones, ones, ones) <= 1e-13


def test_inner_product_mimicry_random():
    base = make_base("legendre", 4)
    rng = np.random.default_rng(2)
    n = base.P.size
    res = check_inner_product_mimicry(
        base, rng.standard_normal(n), rng.standard_normal(n),
        rng.standard_normal(n), rng.standard_normal(n),
    )
    assert res <= 1e-12


def test_naive_operator_breaks_mimicry():
    base = make_base("legendre", 4)
    rng = np.random.default_rng(4)
    n = base.P.size
    Phi, Psi = rng.standard_normal(n), rng.standard_normal(n)
    U, V = rng.standard_normal(n), rng.standard_normal(n)
    corrected = check_inner_product_mimicry(base, Phi, Psi, U, V)
    naive = naive_inner_product_residual(base, Phi, Psi, U, V)
    assert naive >= 1e3 * max(corrected, 1e-15)


def test_swap_symmetry():
    base = make_base("legendre", 3)
    rng = np.random.default_rng(8)
    n = base.P.size
    Phi, Psi = rng.standard_normal(n), rng.standard_normal(n)
    fw = build_varcoef_q(base, Phi, Psi)
    bw = build_varcoef_q(base, Psi, Phi)
    rhs = (fw.psi[:, None] * base.E).T @ (
        base.P_face[:, None] * base.N[:, None] * (fw.phi[:, None] * base.E)
    )
    np.testing.assert_allclose(fw.Q_corrected + bw.Q_corrected.T, rhs, atol=1e-12)


def test_dimension_mismatch_rejected():
    base = make_base("legendre", 3)
    with pytest.raises(ValueError):
        build_varcoef_q(base, np.ones(3), np.ones(base.P.size))


@pytest.mark.parametrize("family", ["legendre", "lobatto"])
@pytest.mark.parametrize("n", [2, 4, 6])
@pytest.mark.parametrize("direction", ["xi", "eta"])
def test_identity_fuzz_families(family, n, direction):
    base = make_base(family, n, direction)
    rng = np.random.default_rng(n * 31 + (direction == "eta"))
    scale = np.max(np.abs(base.Q))
    for _ in range(25):
        Phi = rng.standard_normal(base.P.size)
        Psi = rng.standard_normal(base.P.size)
        fw = build_varcoef_q(base, Phi, Psi)
        bw = build_varcoef_q(base, Psi, Phi)
        assert varcoef_identity_residual(fw, bw) <= 1e-12 * max(1.0, scale)
