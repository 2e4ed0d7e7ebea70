import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsbp.quadrature import (
    NodalQuadrature1D,
    gauss_legendre,
    gauss_lobatto,
    lagrange_eval,
    lagrange_matrix,
)

ALL_RULES = [gauss_legendre(n) for n in range(1, 10)] + [
    gauss_lobatto(n) for n in range(2, 10)
]


def test_gauss_legendre_one_point_is_midpoint():
    q = gauss_legendre(1)
    assert q.nodes == pytest.approx([0.5])
    assert q.weights == pytest.approx([1.0])
    assert q.degree == 1
    assert not q.boundary_conforming


def test_gauss_legendre_two_points_analytic():
    # Roots of the degree-2 Legendre polynomial, mapped to [0,1].
    q = gauss_legendre(2)
    assert q.nodes == pytest.approx([(1 - 1 / np.sqrt(3)) / 2, (1 + 1 / np.sqrt(3)) / 2], abs=1e-15)
    assert q.weights == pytest.approx([0.5, 0.5], abs=1e-15)


def test_gauss_legendre_five_points_integrates_x9():
    q = gauss_legendre(5)
    assert q.degree == 9
    assert abs(q.weights @ q.nodes**9 - 0.1) <= 1e-14


def test_gauss_legendre_matches_numpy():
    for n in range(1, 21):
        q = gauss_legendre(n)
        x, w = np.polynomial.legendre.leggauss(n)
        np.testing.assert_allclose(q.nodes, (x + 1) / 2, atol=1e-14)
        np.testing.assert_allclose(q.weights, w / 2, atol=1e-14)


def test_gauss_lobatto_small_rules():
    q2 = gauss_lobatto(2)
    assert q2.nodes == pytest.approx([0.0, 1.0])
    assert q2.weights == pytest.approx([0.5, 0.5])
    q3 = gauss_lobatto(3)
    assert q3.nodes == pytest.approx([0.0, 0.5, 1.0], abs=1e-15)
    assert q3.weights == pytest.approx([1 / 6, 2 / 3, 1 / 6], abs=1e-15)


def test_gauss_lobatto_four_point_degree():
    q = gauss_lobatto(4)
    assert q.degree == 5
    assert abs(q.weights @ q.nodes**5 - 1 / 6) <= 1e-14
    assert abs(q.weights @ q.nodes**6 - 1 / 7) > 1e-6


def test_invalid_arguments():
    with pytest.raises(ValueError):
        gauss_legendre(0)
    with pytest.raises(ValueError):
        gauss_lobatto(1)
    with pytest.raises(ValueError):
        gauss_legendre(22)


@pytest.mark.parametrize("quad", ALL_RULES, ids=lambda q: f"{'lob' if q.boundary_conforming else 'leg'}{q.num_nodes}")
def test_monomial_exactness(quad):
    for j in range(quad.degree + 1):
        assert abs(quad.weights @ quad.nodes**j - 1 / (j + 1)) <= 1e-13


@pytest.mark.parametrize("quad", ALL_RULES, ids=lambda q: f"{'lob' if q.boundary_conforming else 'leg'}{q.num_nodes}")
def test_symmetry_about_half(quad):
    np.testing.assert_allclose(quad.nodes, 1 - quad.nodes[::-1], atol=1e-14)
    np.testing.assert_allclose(quad.weights, quad.weights[::-1], atol=1e-14)
    assert abs(quad.weights.sum() - 1.0) <= 1e-14


def test_lagrange_kronecker_delta():
    for quad in (gauss_legendre(4), gauss_lobatto(5)):
        for k, node in enumerate(quad.nodes):
            vals = lagrange_eval(quad, node)
            expected = np.zeros(quad.num_nodes)
            expected[k] = 1.0
            np.testing.assert_allclose(vals, expected, atol=1e-13)


def test_lagrange_quadratic_interpolation():
    quad = gauss_lobatto(3)
    f = quad.nodes**2
    # Interpolant of x^2 at 0.25 is exact: 0.0625.
    assert lagrange_eval(quad, 0.25) @ f == pytest.approx(0.0625, abs=1e-14)


def test_lagrange_two_point_extrapolation_to_zero():
    quad = gauss_legendre(2)
    vals = lagrange_eval(quad, 0.0)
    np.testing.assert_allclose(vals, [(1 + np.sqrt(3)) / 2, (1 - np.sqrt(3)) / 2], atol=1e-14)


def test_lagrange_partition_of_unity_random_points():
    rng = np.random.default_rng(7)
    pts = rng.uniform(-0.1, 1.1, size=1000)
    for quad in (gauss_legendre(6), gauss_lobatto(7)):
        L = lagrange_matrix(quad, pts)
        np.testing.assert_allclose(L.sum(axis=1), 1.0, atol=1e-11)


def test_lagrange_rejects_non_finite():
    with pytest.raises(ValueError):
        lagrange_eval(gauss_legendre(3), np.nan)


@given(
    n=st.integers(min_value=1, max_value=12),
    x=st.floats(min_value=-0.1, max_value=1.1, allow_nan=False),
)
@settings(max_examples=60, deadline=None)
def test_partition_of_unity_property(n, x):
    quad = gauss_legendre(n)
    assert abs(lagrange_eval(quad, x).sum() - 1.0) <= 1e-11


def test_quadrature_validation():
    with pytest.raises(ValueError):
        NodalQuadrature1D(np.array([0.5, 0.2]), np.array([0.5, 0.5]), 1, False)
    with pytest.raises(ValueError):
        NodalQuadrature1D(np.array([0.2, 0.5]), np.array([0.5, -0.5]), 1, False)
