"""Hamiltonians H(grad phi, x) with their gradient-derivatives.

1D models are called as ``H(p, x, side)`` and ``H1(p, x, side)``; ``side`` is
-1 / +1 for a left / right limit at an interface and 0 elsewhere. It only
matters for coefficients that jump in x. 2D models are called as
``H(p, q, x, y)``, ``H1(...)`` and ``H2(...)``.

``sign(0) = 0`` throughout, so the derivative of ``|p|`` at 0 is 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

sign = np.sign


@dataclass(frozen=True)
class HamiltonianModel:
    name: str
    dim: int
    H: Callable
    H1: Callable
    H2: Optional[Callable] = None
    convex: bool = False
    smooth: bool = True
    # convex conjugate L(v) of a 1D convex H, used by the Hopf-Lax formula
    lagrangian: Optional[Callable] = None
    # H(p) = speed * |p|: the conjugate is the indicator of |v| <= speed
    speed_bound: Optional[float] = None

    # 1D models expose the same interface-evaluation hooks as
    # DirectionalHamiltonian so the Riemann layer can treat both alike.
    def normal_value(self, pn, pt, x, side=0):
        return self.H(pn, x, side)

    def normal_slope(self, pn, pt, x, side=0):
        return self.H1(pn, x, side)

    def gradient(self, p, q, x, y):
        return self.H1(p, q, x, y), self.H2(p, q, x, y)


class DirectionalHamiltonian:
    """2D model seen along an interface with unit normal n and tangent t.

    ``H(pn, pt)`` evaluates the model at the gradient ``pn * n + pt * t`` and
    ``Hn`` is the derivative along n. n and t may be arrays of vectors
    broadcasting against the traces (shape ``(..., 2)``).
    """

    def __init__(self, model, n, t, tol=1e-12):
        if model.dim != 2:
            raise ValueError("directional view needs a 2D Hamiltonian")
        n = np.asarray(n, dtype=float)
        t = np.asarray(t, dtype=float)
        if (np.any(np.abs(np.linalg.norm(n, axis=-1) - 1) > tol)
                or np.any(np.abs(np.linalg.norm(t, axis=-1) - 1) > tol)):
            raise ValueError("normal and tangent must be unit vectors")
        if np.any(np.abs(np.sum(n * t, axis=-1)) > tol):
            raise ValueError("normal and tangent must be orthogonal")
        self.model = model
        self.n = n
        self.t = t

    def _grad(self, pn, pt):
        n, t = self.n, self.t
        return pn * n[..., 0] + pt * t[..., 0], pn * n[..., 1] + pt * t[..., 1]

    def H(self, pn, pt, x, y):
        p, q = self._grad(pn, pt)
        return self.model.H(p, q, x, y)

    def Hn(self, pn, pt, x, y):
        p, q = self._grad(pn, pt)
        h1, h2 = self.model.gradient(p, q, x, y)
        return h1 * self.n[..., 0] + h2 * self.n[..., 1]

    def normal_value(self, pn, pt, x, side=0):
        return self.H(pn, pt, *x)

    def normal_slope(self, pn, pt, x, side=0):
        return self.Hn(pn, pt, *x)


def directional(model2d, n, t):
    return DirectionalHamiltonian(model2d, n, t)


# ---------------------------------------------------------------------------
# catalog


def _sign_cos(x, side):
    """sign(cos x), taking one-sided limits where cos x vanishes."""
    c = np.cos(x)
    s = sign(c)
    side = np.asarray(side)
    if np.any(side != 0):
        # cos(x + side*eps) ~ cos x - side*eps*sin x
        limit = sign(-side * np.sin(x))
        s = np.where((np.abs(c) < 1e-12) & (side != 0), limit, s)
    return s


def _zero_like(*args):
    return np.zeros(np.broadcast(*args).shape)


def _1d(name, H, H1, **kw):
    return HamiltonianModel(name=name, dim=1, H=H, H1=H1, **kw)


def _2d(name, H, H1, H2, **kw):
    return HamiltonianModel(name=name, dim=2, H=H, H1=H1, H2=H2, **kw)


def _quartic(p):
    p2 = p * p
    return 0.25 * (p2 - 1.0) * (p2 - 4.0)


def _surface(p, q):
    return np.sqrt(p * p + q * q + 1.0)


_CATALOG = {
    "linsmth": lambda: _1d(
        "linsmth",
        lambda p, x, side=0: np.sin(x) * p,
        lambda p, x, side=0: np.sin(x) + 0.0 * p,
        convex=True),
    "linnonsmth": lambda: _1d(
        "linnonsmth",
        lambda p, x, side=0: _sign_cos(x, side) * p,
        lambda p, x, side=0: _sign_cos(x, side) + 0.0 * p,
        convex=True, smooth=False),
    "burgers1d": lambda: _1d(
        "burgers1d",
        lambda p, x, side=0: 0.5 * p * p,
        lambda p, x, side=0: p + 0.0 * x,
        convex=True, lagrangian=lambda v: 0.5 * v * v),
    "eikonal1d": lambda: _1d(
        "eikonal1d",
        lambda p, x, side=0: np.abs(p) + 0.0 * x,
        lambda p, x, side=0: sign(p) + 0.0 * x,
        convex=True, smooth=False, speed_bound=1.0),
    "cos1d": lambda: _1d(
        "cos1d",
        lambda p, x, side=0: -np.cos(p + 1.0) + 0.0 * x,
        lambda p, x, side=0: np.sin(p + 1.0) + 0.0 * x),
    "quartic1d": lambda: _1d(
        "quartic1d",
        lambda p, x, side=0: _quartic(p) + 0.0 * x,
        lambda p, x, side=0: p * (p * p - 2.5) + 0.0 * x),
    "rotation": lambda: _2d(
        "rotation",
        lambda p, q, x, y: -y * p + x * q,
        lambda p, q, x, y: -y + 0.0 * p,
        lambda p, q, x, y: x + 0.0 * q,
        convex=True),
    "burgers2d": lambda: _2d(
        "burgers2d",
        lambda p, q, x, y: 0.5 * (p + q + 1.0) ** 2,
        lambda p, q, x, y: p + q + 1.0,
        lambda p, q, x, y: p + q + 1.0,
        convex=True),
    "crossderiv": lambda: _2d(
        "crossderiv",
        lambda p, q, x, y: p * q,
        lambda p, q, x, y: q + 0.0 * p,
        lambda p, q, x, y: p + 0.0 * q),
    "control": lambda: _2d(
        "control",
        lambda p, q, x, y: (np.sin(y) * p + (np.sin(x) + sign(q)) * q
                            - 0.5 * np.sin(y) ** 2 + np.cos(x) - 1.0),
        lambda p, q, x, y: np.sin(y) + 0.0 * p,
        lambda p, q, x, y: np.sin(x) + sign(q),
        smooth=False),
    "cos2d": lambda: _2d(
        "cos2d",
        lambda p, q, x, y: -np.cos(p + q + 1.0),
        lambda p, q, x, y: np.sin(p + q + 1.0),
        lambda p, q, x, y: np.sin(p + q + 1.0)),
    "sinsum": lambda: _2d(
        "sinsum",
        lambda p, q, x, y: np.sin(p + q),
        lambda p, q, x, y: np.cos(p + q),
        lambda p, q, x, y: np.cos(p + q)),
    "surface": lambda: _2d(
        "surface",
        lambda p, q, x, y: -_surface(p, q),
        lambda p, q, x, y: -p / _surface(p, q),
        lambda p, q, x, y: -q / _surface(p, q)),
}

NAMES = tuple(_CATALOG)


def catalog(name):
    try:
        return _CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown Hamiltonian {name!r}; known: {', '.join(NAMES)}") from None


def embed_1d(model):
    """View a 1D model as a 2D one that ignores q and y."""
    if model.dim != 1:
        raise ValueError("embed_1d expects a 1D model")
    return _2d(
        model.name + "-2d",
        lambda p, q, x, y: model.H(p, x, 0) + 0.0 * q,
        lambda p, q, x, y: model.H1(p, x, 0) + 0.0 * q,
        lambda p, q, x, y: _zero_like(p, q),
        convex=model.convex, smooth=model.smooth)


def reduce_diagonal(model, lagrangian=None):
    """1D model G(s) = H(s, s) governing data that depends on x + y only.

    Valid for Hamiltonians without explicit x, y dependence.
    """
    if model.dim != 2:
        raise ValueError("reduce_diagonal expects a 2D model")
    z = 0.0
    return _1d(
        model.name + "-diag",
        lambda s, xi, side=0: model.H(s, s, z, z) + 0.0 * xi,
        lambda s, xi, side=0: model.H1(s, s, z, z) + model.H2(s, s, z, z) + 0.0 * xi,
        convex=model.convex, smooth=model.smooth, lagrangian=lagrangian)
