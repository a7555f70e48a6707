"""Error norms, convergence tables and reference solutions.

Reference solutions come in four flavours:

* closed forms (linear transport, rotation, eikonal minimum formula),
* characteristic tracing for x-independent Hamiltonians before the first
  gradient singularity,
* the Hopf-Lax minimum for convex Hamiltonians,
* a fine-grid monotone Lax-Friedrichs solve for everything else.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .field import domain_measure, element_maps, n_elements
from .basis import volume_rule

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class OracleError(ValueError):
    """Reference solution requested outside its range of validity."""


@dataclass(frozen=True)
class ExactSolution:
    """phi(x, t) or phi(x, y, t) with its provenance and validity window."""

    evaluate: Callable
    provenance: str
    dim: int = 1
    valid_until: float = math.inf

    def __call__(self, *args):
        t = args[-1]
        if t > self.valid_until * (1 + 1e-12):
            raise OracleError(
                f"{self.provenance} reference is valid up to t={self.valid_until:.6g}, requested t={t:.6g}")
        return self.evaluate(*args)

    def at(self, t):
        """The profile at a fixed time as a function of space only."""
        if self.dim == 1:
            return lambda x: self(x, t)
        return lambda x, y: self(x, y, t)


# ---------------------------------------------------------------------------
# norms and orders


def error_norms(field, exact, quad_degree=None):
    """Domain-averaged (L1, L2, Linf) of field - exact at volume quadrature points.

    ``exact`` is an :class:`ExactSolution` (evaluated at ``field.time``) or a
    plain function of space.
    """
    k = field.basis.degree
    degree = 2 * k + 2 if quad_degree is None else quad_degree
    rule = volume_rule(field.basis.kind, degree)
    maps = element_maps(field.mesh)
    E = n_elements(field.mesh)
    elems = np.arange(E)[:, None]
    Q = len(rule.weights)
    if field.basis.dim == 1:
        ref = np.broadcast_to(rule.points, (E, Q))
        pts = maps.to_physical(elems, ref)
    else:
        ref = np.broadcast_to(rule.points, (E, Q, 2))
        pts = maps.to_physical(elems, ref)
    vals, _ = field.evaluate_reference(np.broadcast_to(elems, (E, Q)), ref)
    f = exact.at(field.time) if isinstance(exact, ExactSolution) else exact
    ex = f(pts) if field.basis.dim == 1 else f(pts[..., 0], pts[..., 1])
    err = np.abs(vals - ex)
    w = rule.weights[None, :] * maps.det[:, None]
    vol = domain_measure(field.mesh)
    L1 = float(np.sum(w * err) / vol)
    L2 = float(np.sqrt(np.sum(w * err**2) / vol))
    Linf = float(np.max(err))
    return L1, L2, Linf


def observed_order(e_prev, e_cur, h_prev, h_cur):
    return math.log(e_prev / e_cur) / math.log(h_prev / h_cur)


@dataclass
class ConvergenceReport:
    labels: list
    h: list
    errors: list                       # rows of (L1, L2, Linf)
    metadata: dict = dc_field(default_factory=dict)

    @property
    def orders(self):
        rows = [(None, None, None)]
        for i in range(1, len(self.errors)):
            rows.append(tuple(observed_order(self.errors[i - 1][n], self.errors[i][n],
                                             self.h[i - 1], self.h[i]) for n in range(3)))
        return rows

    def order(self, norm="L1", pair=-1):
        n = {"L1": 0, "L2": 1, "Linf": 2}[norm]
        return self.orders[pair][n]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "h", "L1", "L1_order", "L2", "L2_order", "Linf", "Linf_order"])
        for lab, h, e, o in zip(self.labels, self.h, self.errors, self.orders):
            row = [lab, f"{h:.10g}"]
            for n in range(3):
                row += [f"{e[n]:.6e}", "" if o[n] is None else f"{o[n]:.4f}"]
            w.writerow(row)
        return buf.getvalue()

    def to_markdown(self):
        lines = ["| N | h | L1 | order | L2 | order | Linf | order |",
                 "|---|---|---|---|---|---|---|---|"]
        for lab, h, e, o in zip(self.labels, self.h, self.errors, self.orders):
            cells = [str(lab), f"{h:.4g}"]
            for n in range(3):
                cells += [f"{e[n]:.2E}", "" if o[n] is None else f"{o[n]:.2f}"]
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"


def convergence_orders(errors, resolutions, labels=None, metadata=None):
    """Build a report from per-resolution (L1, L2, Linf) rows and mesh sizes h."""
    errors = [tuple(float(v) for v in e) for e in errors]
    h = [float(v) for v in resolutions]
    if len(errors) != len(h) or len(h) < 2:
        raise ValueError("need at least two rows with one resolution each")
    d = np.diff(h)
    if not (np.all(d < 0) or np.all(d > 0)):
        raise ValueError("resolutions must be strictly monotone")
    labels = list(labels) if labels is not None else [f"{v:.6g}" for v in h]
    return ConvergenceReport(labels, h, errors, dict(metadata or {}))


# ---------------------------------------------------------------------------
# scalar root finding and minimisation, vectorised over independent problems


def _bisect_polish(f, lo, hi, tol=1e-13, max_iter=200):
    """Roots of increasing f on brackets [lo, hi] (arrays), then secant polish."""
    flo = f(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
        if np.max(hi - lo) <= tol:
            break
    x0, x1 = lo, hi
    f0, f1 = f(x0), f(x1)
    denom = np.where(f1 != f0, f1 - f0, 1.0)
    x = np.where(f1 != f0, x1 - f1 * (x1 - x0) / denom, 0.5 * (x0 + x1))
    return np.clip(x, np.minimum(x0, x1), np.maximum(x0, x1))


def _golden_min(f, lo, hi, tol=1e-12, max_iter=200):
    """Vectorised golden-section minimisation of f on [lo, hi]."""
    a, b = lo.copy(), hi.copy()
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if np.max(b - a) <= tol:
            break
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - GOLDEN * (b - a)
        new_d = a + GOLDEN * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        fc_next = np.where(left, f(c_next), fd)
        fd_next = np.where(left, fc, f(d_next))
        c, d, fc, fd = c_next, d_next, fc_next, fd_next
    y = 0.5 * (a + b)
    return y, f(y)


# ---------------------------------------------------------------------------
# characteristic tracing


def characteristics_1d(model, phi0, dphi0, x, t, speed_bound, samples=256):
    """phi(x, t) for phi_t + H(phi_x) = 0 by tracing straight characteristics.

    Solves x0 + t H'(phi0'(x0)) = x. The search window is
    |x0 - x| <= t * speed_bound; more than one sign change of the residual in
    the window means characteristics have crossed, i.e. ``t`` is past the
    first singularity.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape
    xf = x.reshape(-1)
    if t == 0:
        return phi0(x)
    w = t * speed_bound + 1e-12
    s = np.linspace(-w, w, samples)
    grid = xf[:, None] + s[None, :]
    res = grid + t * model.H1(dphi0(grid), grid, 0) - xf[:, None]
    sg = np.sign(res)
    changes = np.count_nonzero(sg[:, 1:] != sg[:, :-1], axis=1)
    if np.any(changes != 1):
        raise OracleError(f"characteristics cross or leave the search window at t={t:.6g}")
    idx = np.argmax(sg[:, 1:] != sg[:, :-1], axis=1)
    rows = np.arange(len(xf))
    lo, hi = grid[rows, idx], grid[rows, idx + 1]
    target = xf

    def f(z):
        return z + t * model.H1(dphi0(z), z, 0) - target

    x0 = _bisect_polish(f, lo, hi)
    p = dphi0(x0)
    val = phi0(x0) + t * (p * model.H1(p, x0, 0) - model.H(p, x0, 0))
    return val.reshape(shape)


def characteristics_oracle(case, x, t):
    """Characteristic tracing for a 1D case (or a 2D case reducible to 1D)."""
    model, phi0, dphi0, bound = case.characteristic_data()
    if case.singular_time is not None and t >= case.singular_time:
        raise OracleError(f"{case.name}: t={t:.6g} is past the first singularity "
                          f"at t={case.singular_time:.6g}")
    return characteristics_1d(model, phi0, dphi0, x, t, bound)


def cross_characteristics(x, y, t):
    """phi_t + phi_x phi_y = 0 with phi0 = sin x + cos y, before crossing (t < 1).

    Characteristics x = x0 - t sin y0, y = y0 + t cos x0 carry p = cos x0,
    q = -sin y0 and phi = phi0 + t p q. Eliminating x0 leaves the monotone
    scalar equation y0 + t cos(x + t sin y0) = y.
    """
    if t >= 1.0:
        raise OracleError("cross-derivative characteristics cross at t = 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    shape = x.shape
    xf, yf = x.reshape(-1), y.reshape(-1)
    if t == 0:
        return (np.sin(x) + np.cos(y)).copy()

    def f(z):
        return z + t * np.cos(xf + t * np.sin(z)) - yf

    y0 = _bisect_polish(f, yf - t - 1e-9, yf + t + 1e-9)
    x0 = xf + t * np.sin(y0)
    p, q = np.cos(x0), -np.sin(y0)
    return (np.sin(x0) + np.cos(y0) + t * p * q).reshape(shape)


# ---------------------------------------------------------------------------
# Hopf-Lax


def hopf_lax_1d(phi0, x, t, lagrangian=None, speed_bound=None, window=None,
                period=2 * math.pi, per_period=4096):
    """min_y [phi0(y) + t L((x - y) / t)] for convex H.

    With ``speed_bound`` (H = c |p|) the minimum is over |y - x| <= c t.
    Otherwise ``lagrangian`` is the convex conjugate and ``window`` bounds
    |x - y| (at most t times the largest |phi0'|).
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape
    xf = x.reshape(-1)
    if t == 0:
        return phi0(x)
    if speed_bound is not None:
        w = speed_bound * t
        cost = lambda y, xx: phi0(y)
    else:
        if lagrangian is None or window is None:
            raise ValueError("Hopf-Lax needs a conjugate and a search window")
        w = window
        cost = lambda y, xx: phi0(y) + t * lagrangian((xx - y) / t)
    n = max(65, int(per_period * 2 * w / period) + 1)
    s = np.linspace(-w, w, n)
    grid = xf[:, None] + s[None, :]
    vals = cost(grid, xf[:, None])
    best = np.argmin(vals, axis=1)
    step = s[1] - s[0]
    lo = np.maximum(xf + s[np.maximum(best - 1, 0)], xf - w)
    hi = np.minimum(xf + s[np.minimum(best + 1, n - 1)], xf + w)
    _, v = _golden_min(lambda y: cost(y, xf), lo, hi)
    v = np.minimum(v, vals[np.arange(len(xf)), best])
    return v.reshape(shape)


def hopf_lax_oracle(case, x, t):
    model = case.model_1d()
    if not model.convex:
        raise OracleError(f"{case.name}: Hopf-Lax needs a convex Hamiltonian")
    return hopf_lax_1d(case.phi0_1d, x, t, lagrangian=model.lagrangian,
                       speed_bound=model.speed_bound,
                       window=None if model.speed_bound is not None else t * case.slope_bound,
                       period=case.period_1d)


def hopf_corner(H, u_left, u_right, x, t, samples=4096):
    """Exact solution for piecewise-linear data with a concave corner.

    phi0(x) = min(u_left x, u_right x) with u_left > u_right evolves, for any
    continuous H(p), into phi(x, t) = min over u in [u_right, u_left] of
    x u - t H(u). The minimum is located by dense sampling and refined by
    golden section.
    """
    if not u_left > u_right:
        raise ValueError("the corner formula needs u_left > u_right (concave data)")
    x = np.asarray(x, dtype=float)
    shape = x.shape
    xf = x.reshape(-1)
    if t == 0:
        return np.minimum(u_left * x, u_right * x)
    u = np.linspace(u_right, u_left, samples)
    Hu = H(u)
    vals = xf[:, None] * u[None, :] - t * Hu[None, :]
    best = np.argmin(vals, axis=1)
    lo = u[np.maximum(best - 1, 0)]
    hi = u[np.minimum(best + 1, samples - 1)]
    _, v = _golden_min(lambda w: xf * w - t * H(w), lo, hi)
    v = np.minimum(v, vals[np.arange(len(xf)), best])
    return v.reshape(shape)


# ---------------------------------------------------------------------------
# closed forms


def linear_sine_transport(x, t):
    """phi_t + sin(x) phi_x = 0, phi0 = sin: foot of the characteristic via tan(x/2) e^-t."""
    x = np.asarray(x, dtype=float)
    x0 = 2.0 * np.arctan2(np.sin(0.5 * x) * np.exp(-t), np.cos(0.5 * x))
    return np.sin(x0)


def window_min_sine(x, t):
    """min of sin over [x - t, x + t] (valid for t < pi)."""
    x = np.asarray(x, dtype=float)
    lo = x - t
    # first point congruent to 3 pi / 2 at or after lo
    k = np.ceil((lo - 1.5 * math.pi) / (2 * math.pi))
    trough = 1.5 * math.pi + 2 * math.pi * k
    inside = trough <= x + t
    return np.where(inside, -1.0, np.minimum(np.sin(x - t), np.sin(x + t)))


# ---------------------------------------------------------------------------
# Lax-Friedrichs reference


@dataclass(frozen=True)
class GriddedReference:
    x: np.ndarray
    phi: np.ndarray
    t: float

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.x, self.phi)


_LF_CACHE = {}


def lax_friedrichs_1d(H, dH_bound, phi0, a, b, t, n_points=16384, cfl=0.4, boundary="outflow"):
    """First-order monotone Lax-Friedrichs solution on a uniform node grid.

    phi^{n+1} = phi - dt [H((p+ + p-)/2) - alpha (p+ - p-)/2] with one-sided
    differences p+-, alpha = dH_bound and dt = cfl dx / alpha. Outflow ends
    use linear extrapolation for the ghost values.
    """
    if boundary == "periodic":
        x = a + (b - a) * np.arange(n_points) / n_points
    else:
        x = np.linspace(a, b, n_points)
    dx = x[1] - x[0]
    phi = np.asarray(phi0(x), dtype=float).copy()
    alpha = float(dH_bound)
    dt_max = cfl * dx / alpha
    time = 0.0
    while time < t * (1 - 1e-14):
        dt = min(dt_max, t - time)
        if boundary == "periodic":
            ext = np.concatenate([phi[-1:], phi, phi[:1]])
        else:
            ext = np.concatenate([[2 * phi[0] - phi[1]], phi, [2 * phi[-1] - phi[-2]]])
        pm = (ext[1:-1] - ext[:-2]) / dx
        pp = (ext[2:] - ext[1:-1]) / dx
        phi = phi - dt * (H(0.5 * (pp + pm)) - 0.5 * alpha * (pp - pm))
        time += dt
    if boundary == "periodic":
        x = np.append(x, b)
        phi = np.append(phi, phi[0])
    return GriddedReference(x, phi, t)


def reference_lf_solver(case, resolution=16384, t=None):
    """Cached fine-grid reference for a 1D case at its final time (or ``t``)."""
    t = case.t_final if t is None else t
    key = (case.name, int(resolution), float(t))
    if key not in _LF_CACHE:
        model = case.model_1d()
        _LF_CACHE[key] = lax_friedrichs_1d(
            lambda p: model.H(p, 0.0, 0), case.speed_max, case.phi0_1d,
            case.domain[0], case.domain[1], t, n_points=resolution,
            boundary=case.boundary)
    return _LF_CACHE[key]
