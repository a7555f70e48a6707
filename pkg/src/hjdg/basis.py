"""Reference-element bases and quadrature rules.

Reference elements:

* interval   ``[-1, 1]``
* rectangle  ``[-1, 1]^2``
* triangle   ``{(x, y): x, y >= 0, x + y <= 1}``

Every basis is orthonormal on its reference element, so the element mass
matrix is ``|det J| * I`` and mass inversion is a diagonal divide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre
from scipy.special import roots_jacobi

KINDS = ("interval", "rectangle", "triangle")

REFERENCE_MEASURE = {"interval": 2.0, "rectangle": 4.0, "triangle": 0.5}

# Collapsed (Duffy) rules are generated on demand; this only guards against
# absurd requests.
MAX_TRIANGLE_DEGREE = 40


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    degree: int

    def integrate(self, f):
        """Integrate ``f(points)`` over the reference element."""
        return np.dot(self.weights, f(self.points))


def gauss_rule(n):
    """n-point Gauss-Legendre rule on [-1, 1], exact to degree 2n - 1."""
    if n < 1:
        raise ValueError(f"Gauss rule needs at least one point, got {n}")
    x, w = legendre.leggauss(n)
    return QuadratureRule(points=x, weights=w, degree=2 * n - 1)


def rectangle_rule(n):
    """Tensor n x n Gauss rule on [-1, 1]^2."""
    g = gauss_rule(n)
    xx, yy = np.meshgrid(g.points, g.points, indexing="ij")
    ww = np.outer(g.weights, g.weights)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    return QuadratureRule(points=pts, weights=ww.ravel(), degree=2 * n - 1)


def triangle_rule(target_degree):
    """Collapsed Gauss rule on the unit triangle exact to ``target_degree``.

    Conical product of Gauss-Legendre in the collapsed direction and
    Gauss-Jacobi(1, 0) in the other. All points lie strictly inside the
    triangle and all weights are positive.
    """
    if not 0 <= target_degree <= MAX_TRIANGLE_DEGREE:
        raise ValueError(
            f"unsupported triangle quadrature degree {target_degree}; "
            f"supported range is 0..{MAX_TRIANGLE_DEGREE}"
        )
    n = max(1, (target_degree + 2) // 2)
    u, wu = legendre.leggauss(n)
    # weight (1 - s) on [-1, 1] for the collapsed coordinate
    s, ws = roots_jacobi(n, 1.0, 0.0)
    u = 0.5 * (u + 1.0)
    wu = 0.5 * wu
    v = 0.5 * (s + 1.0)
    wv = 0.25 * ws
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ww = np.outer(wu, wv)
    x = uu * (1.0 - vv)
    y = vv
    pts = np.column_stack([x.ravel(), y.ravel()])
    return QuadratureRule(points=pts, weights=ww.ravel(), degree=2 * n - 1)


def volume_rule(kind, degree):
    """Smallest standard rule on ``kind`` exact to ``degree``."""
    if kind == "interval":
        return gauss_rule(degree // 2 + 1)
    if kind == "rectangle":
        return rectangle_rule(degree // 2 + 1)
    if kind == "triangle":
        return triangle_rule(degree)
    raise ValueError(f"unknown element kind {kind!r}")


def _legendre_orthonormal(x, k):
    """Values and derivatives of normalized Legendre polynomials 0..k."""
    x = np.asarray(x, dtype=float)
    scale = np.sqrt((2.0 * np.arange(k + 1) + 1.0) / 2.0)
    vals = legendre.legvander(x, k) * scale
    ders = np.empty_like(vals)
    for i in range(k + 1):
        c = np.zeros(i + 1)
        c[i] = scale[i]
        ders[..., i] = legendre.legval(x, legendre.legder(c)) if i else 0.0
    return vals, ders


def _total_degree_modes(k):
    return [(m - j, j) for m in range(k + 1) for j in range(m + 1)]


class ReferenceBasis:
    """Orthonormal modal basis for P^k on a reference element.

    ``tabulate(points)`` returns ``(values, grads)`` with shapes
    ``(npts, n_dofs)`` and ``(npts, n_dofs, dim)`` (``dim`` is dropped for the
    interval, where ``grads`` is ``(npts, n_dofs)``).
    """

    def __init__(self, kind, k):
        if kind not in KINDS:
            raise ValueError(f"unknown element kind {kind!r}; expected one of {KINDS}")
        if int(k) != k or k < 1:
            raise ValueError(f"polynomial degree must be an integer >= 1, got {k}")
        self.kind = kind
        self.degree = int(k)
        self.dim = 1 if kind == "interval" else 2
        self.measure = REFERENCE_MEASURE[kind]
        if kind == "interval":
            self.modes = [(i,) for i in range(k + 1)]
        else:
            self.modes = _total_degree_modes(k)
        self.n_dofs = len(self.modes)
        if kind == "triangle":
            self._build_triangle()

    def __repr__(self):
        return f"ReferenceBasis({self.kind!r}, k={self.degree})"

    # triangle: Gram-Schmidt on centred monomials, done once via Cholesky
    def _build_triangle(self):
        rule = triangle_rule(2 * self.degree)
        m, _ = self._monomials(rule.points)
        gram = (m * rule.weights[:, None]).T @ m
        chol = np.linalg.cholesky(gram)
        self._tri_coef = np.linalg.inv(chol).T

    def _monomials(self, pts):
        x = pts[:, 0] - 1.0 / 3.0
        y = pts[:, 1] - 1.0 / 3.0
        vals = np.empty((len(pts), self.n_dofs))
        grads = np.empty((len(pts), self.n_dofs, 2))
        for n, (a, b) in enumerate(self.modes):
            vals[:, n] = x**a * y**b
            grads[:, n, 0] = a * x ** max(a - 1, 0) * y**b if a else 0.0
            grads[:, n, 1] = b * x**a * y ** max(b - 1, 0) if b else 0.0
        return vals, grads

    def tabulate(self, points):
        pts = np.asarray(points, dtype=float)
        if self.kind == "interval":
            return _legendre_orthonormal(pts.reshape(-1), self.degree)
        pts = pts.reshape(-1, 2)
        if self.kind == "rectangle":
            vx, dx = _legendre_orthonormal(pts[:, 0], self.degree)
            vy, dy = _legendre_orthonormal(pts[:, 1], self.degree)
            i = np.array([m[0] for m in self.modes])
            j = np.array([m[1] for m in self.modes])
            vals = vx[:, i] * vy[:, j]
            grads = np.stack([dx[:, i] * vy[:, j], vx[:, i] * dy[:, j]], axis=-1)
            return vals, grads
        mono, dmono = self._monomials(pts)
        vals = mono @ self._tri_coef
        grads = np.einsum("qmd,mn->qnd", dmono, self._tri_coef)
        return vals, grads

    def mean_mode_value(self):
        """Constant value of the first (mean) basis function."""
        return 1.0 / np.sqrt(self.measure)


def make_basis(kind, k):
    return ReferenceBasis(kind, k)
