"""Pruebas de los bloques numéricos compartidos."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from app.shared.numerics.finite_difference import (
    FIRST_CENTRAL, FIRST_FORWARD, SECOND_CENTRAL, apply_stencil, backward, gradient, hessian
)
from app.shared.numerics.interpolation import ChebyshevTable2D, lobatto_nodes
from app.shared.numerics.linalg import matrix_function, op_norm, symmetry_defect
from app.shared.numerics.ode import hermite_eval, rk4_linear
from app.shared.numerics.quadrature import gauss_legendre, log_gauss_legendre, simplex_rule


# ===== CUADRATURA =====

@given(st.integers(min_value=1, max_value=12), st.data())
@settings(max_examples=60, deadline=None)
def test_gauss_legendre_exact_for_degree_2n_minus_1(n, data):
    k = data.draw(st.integers(min_value=0, max_value=2 * n - 1))
    x, w = gauss_legendre(n)
    assert np.sum(w * x ** k) == pytest.approx(1.0 / (k + 1), rel=1e-13, abs=1e-15)


def test_gauss_legendre_maps_interval():
    x, w = gauss_legendre(4, -1.0, 3.0)
    assert np.all((x > -1.0) & (x < 3.0))
    assert np.sum(w) == pytest.approx(4.0)


def test_gauss_legendre_rejects_empty_rule():
    with pytest.raises(ValueError):
        gauss_legendre(0)


def test_log_gauss_legendre_handles_inverse_square():
    a = 0.01
    tau, w = log_gauss_legendre(a, 32)
    assert np.all((tau > a) & (tau < 1.0))
    assert np.sum(w / tau ** 2) == pytest.approx(1.0 / a - 1.0, rel=1e-12)


def test_log_gauss_legendre_degenerate_interval():
    tau, w = log_gauss_legendre(1.0, 8)
    assert tau.size == 0 and w.size == 0
    with pytest.raises(ValueError):
        log_gauss_legendre(0.0, 8)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_simplex_rule_weights_sum_to_simplex_volume(n):
    points, weights = simplex_rule(n, 5)
    assert points.shape == (5 ** n, n)
    assert np.sum(weights) == pytest.approx(1.0 / math.factorial(n), rel=1e-13)
    assert np.all(np.diff(points, axis=1) >= 0.0)


def test_simplex_rule_integrates_ordered_monomial():
    # ∫_{0<s1<s2<1} s1 ds = 1/6
    points, weights = simplex_rule(2, 6)
    assert np.sum(weights * points[:, 0]) == pytest.approx(1.0 / 6.0, rel=1e-13)


def test_simplex_rule_returns_copies():
    points, _ = simplex_rule(2, 3)
    points[:] = -1.0
    again, _ = simplex_rule(2, 3)
    assert np.all(again >= 0.0)


# ===== DIFERENCIAS FINITAS =====

def test_central_stencils_fourth_order():
    h = 1e-2
    x0 = 0.3
    first = apply_stencil(np.sin, x0, h, FIRST_CENTRAL)
    second = apply_stencil(np.sin, x0, h, SECOND_CENTRAL, order=2)
    assert first == pytest.approx(np.cos(x0), abs=1e-8)
    assert second == pytest.approx(-np.sin(x0), abs=1e-7)


def test_one_sided_stencils_agree_with_derivative():
    h = 1e-2
    x0 = 0.7
    forward = apply_stencil(np.exp, x0, h, FIRST_FORWARD)
    back = apply_stencil(np.exp, x0, h, backward(FIRST_FORWARD))
    assert forward == pytest.approx(np.exp(x0), rel=1e-7)
    assert back == pytest.approx(np.exp(x0), rel=1e-7)


def test_gradient_and_hessian_of_quadratic():
    matrix = np.array([[2.0, 0.5], [0.5, 1.0]])
    f = lambda x: x @ matrix @ x  # noqa: E731
    x = np.array([0.3, -0.2])
    np.testing.assert_allclose(gradient(f, x, 1e-3), 2 * matrix @ x, atol=1e-10)
    np.testing.assert_allclose(hessian(f, x, 1e-3), 2 * matrix, atol=1e-6)


# ===== EDO E INTERPOLACIÓN =====

def test_rk4_linear_matches_matrix_exponential():
    steps = 64
    rotation = np.array([[0.0, 1.0], [-1.0, 0.0]])
    generator = np.broadcast_to(rotation, (1, 2 * steps + 1, 2, 2))
    Z = rk4_linear(generator, np.eye(2), steps)
    assert Z.shape == (1, steps + 1, 2, 2)
    np.testing.assert_allclose(Z[0, -1], expm(rotation), atol=1e-8)
    np.testing.assert_allclose(Z[0, 0], np.eye(2))


def test_hermite_reproduces_cubics():
    nodes = np.linspace(0.0, 1.0, 9)
    values = (nodes ** 3 - nodes)[:, None]
    derivs = (3 * nodes ** 2 - 1)[:, None]
    s = np.array([0.0, 0.13, 0.5, 0.77, 1.0])
    np.testing.assert_allclose(hermite_eval(values, derivs, s)[:, 0], s ** 3 - s, atol=1e-14)


def test_chebyshev_table_reproduces_polynomials():
    nodes = lobatto_nodes(6)
    U, V = np.meshgrid(nodes, nodes, indexing="ij")
    values = (U ** 2 * V + V ** 3)[..., None, None]
    table = ChebyshevTable2D.fit(nodes, nodes, values)
    u = np.array([0.1, 0.45, 0.9])
    v = np.array([0.2, 0.6, 0.95])
    np.testing.assert_allclose(table(u, v)[..., 0, 0], u ** 2 * v + v ** 3, atol=1e-12)


def test_lobatto_nodes_include_endpoints():
    nodes = lobatto_nodes(5)
    assert nodes[0] == pytest.approx(0.0, abs=1e-15)
    assert nodes[-1] == pytest.approx(1.0)
    assert np.all(np.diff(nodes) > 0)


# ===== ÁLGEBRA LINEAL =====

def test_matrix_function_exponential_of_antisymmetric():
    beta = np.array([[0.0, 0.7], [-0.7, 0.0]])
    np.testing.assert_allclose(matrix_function(beta, np.exp), expm(beta), atol=1e-13)


def test_matrix_function_batched_family():
    beta = np.array([[0.0, 1.0], [-1.0, 0.0]])
    s = np.array([0.0, 0.5, 1.0])
    family = matrix_function(beta, lambda w: np.exp(np.outer(s, w)))
    assert family.shape == (3, 2, 2)
    np.testing.assert_allclose(family[1], expm(0.5 * beta), atol=1e-13)


def test_op_norm_and_symmetry_defect():
    assert op_norm(np.eye(3)) == pytest.approx(1.0)
    assert symmetry_defect(np.array([[1.0, 2.0], [2.5, 1.0]])) == pytest.approx(0.5)
