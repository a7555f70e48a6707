import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hjdg.basis import (ReferenceBasis, gauss_rule, make_basis, rectangle_rule,
                        triangle_rule, volume_rule)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_gauss_rule_exact_to_degree(n):
    rule = gauss_rule(n)
    for d in range(2 * n):
        exact = (1 - (-1) ** (d + 1)) / (d + 1)
        assert rule.integrate(lambda x: x**d) == pytest.approx(exact, abs=1e-14)


def test_gauss_rule_rejects_zero_points():
    with pytest.raises(ValueError):
        gauss_rule(0)


def test_rectangle_rule_integrates_tensor_monomials():
    rule = rectangle_rule(3)
    f = lambda p: p[:, 0] ** 4 * p[:, 1] ** 2
    assert rule.integrate(f) == pytest.approx((2 / 5) * (2 / 3), abs=1e-14)


@pytest.mark.parametrize("degree", [0, 2, 4, 6, 9])
def test_triangle_rule_exact_on_monomials(degree):
    from math import factorial
    rule = triangle_rule(degree)
    assert rule.weights.sum() == pytest.approx(0.5, abs=1e-14)
    for a in range(degree + 1):
        b = degree - a
        exact = factorial(a) * factorial(b) / factorial(a + b + 2)
        got = rule.integrate(lambda p: p[:, 0] ** a * p[:, 1] ** b)
        assert got == pytest.approx(exact, rel=1e-12, abs=1e-15)


def test_triangle_rule_points_inside():
    p = triangle_rule(8).points
    assert np.all(p >= 0) and np.all(p.sum(axis=1) <= 1)


@pytest.mark.parametrize("kind", ["interval", "rectangle", "triangle"])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_basis_is_orthonormal(kind, k):
    basis = make_basis(kind, k)
    rule = volume_rule(kind, 2 * k + 2)
    vals, _ = basis.tabulate(rule.points)
    gram = (vals * rule.weights[:, None]).T @ vals
    assert np.allclose(gram, np.eye(basis.n_dofs), atol=1e-13)


@pytest.mark.parametrize("kind,k,n", [("interval", 3, 4), ("rectangle", 2, 6), ("triangle", 3, 10)])
def test_dof_counts(kind, k, n):
    assert make_basis(kind, k).n_dofs == n


@pytest.mark.parametrize("kind", ["interval", "rectangle", "triangle"])
def test_first_mode_is_constant_mean(kind):
    basis = make_basis(kind, 2)
    pts = volume_rule(kind, 4).points
    vals, grads = basis.tabulate(pts)
    assert np.allclose(vals[:, 0], basis.mean_mode_value(), atol=1e-14)
    assert np.allclose(grads[:, 0], 0.0, atol=1e-13)


@pytest.mark.parametrize("kind", ["interval", "rectangle", "triangle"])
def test_gradients_match_finite_differences(kind):
    basis = make_basis(kind, 3)
    eps = 1e-6
    if kind == "interval":
        x = np.array([-0.7, 0.1, 0.55])
        _, g = basis.tabulate(x)
        fd = (basis.tabulate(x + eps)[0] - basis.tabulate(x - eps)[0]) / (2 * eps)
        assert np.allclose(g, fd, atol=1e-7)
        return
    x = np.array([[0.2, 0.3], [0.1, 0.6]]) if kind == "triangle" else np.array([[-0.4, 0.3], [0.8, -0.9]])
    _, g = basis.tabulate(x)
    for d in range(2):
        e = np.zeros(2)
        e[d] = eps
        fd = (basis.tabulate(x + e)[0] - basis.tabulate(x - e)[0]) / (2 * eps)
        assert np.allclose(g[..., d], fd, atol=1e-7)


def test_invalid_basis_arguments():
    with pytest.raises(ValueError):
        ReferenceBasis("hexagon", 2)
    with pytest.raises(ValueError):
        ReferenceBasis("interval", 0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_rectangle_basis_reproduces_polynomials(coef):
    """Any P^2 polynomial is recovered exactly by projection onto the basis."""
    basis = make_basis("rectangle", 2)
    rule = rectangle_rule(4)
    x, y = rule.points[:, 0], rule.points[:, 1]
    f = coef[0] + coef[1] * x + coef[2] * y + coef[3] * x * x + coef[4] * x * y + coef[5] * y * y
    vals, _ = basis.tabulate(rule.points)
    c = vals.T @ (rule.weights * f)
    assert np.allclose(vals @ c, f, atol=1e-11)
