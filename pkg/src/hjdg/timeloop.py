"""TVD-RK3 time stepping, step-size control and slope limiters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import CartMesh2D, Mesh1D
from .solver1d import Scheme1D, scheme_1d
from .solver2d import scheme_2d

SPEED_FLOOR = 1e-14


class NumericalBlowUp(RuntimeError):
    """Non-finite coefficients detected during time stepping."""

    def __init__(self, time, stage, element):
        self.time, self.stage, self.element = time, stage, element
        super().__init__(f"non-finite solution at t={time:.6g}, RK stage {stage}, element {element}")


@dataclass(frozen=True)
class TimeControls:
    cfl: float
    t_final: float
    dt_law: str = "standard"
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not self.cfl > 0:
            raise ValueError(f"CFL number must be positive, got {self.cfl}")
        if not self.t_final >= 0:
            raise ValueError(f"final time must be nonnegative, got {self.t_final}")
        if self.dt_law not in ("standard", "p43"):
            raise ValueError(f"unknown dt law {self.dt_law!r}")


def operator_for(field, model, params):
    """The assembled operator object for the field's mesh type."""
    if isinstance(field.mesh, Mesh1D):
        return scheme_1d(field.mesh, field.basis, model, params)
    return scheme_2d(field.mesh, field.basis, model, params)


def _check_finite(u, time, stage):
    if not np.all(np.isfinite(u)):
        bad = np.argwhere(~np.isfinite(u.reshape(len(u), -1)))[0, 0]
        raise NumericalBlowUp(time, stage, int(bad))


def tvd_rk3_step(u, dt, L, limiter=None, time=0.0):
    """One Shu-Osher TVD-RK3 step, limiting after every stage."""
    lim = limiter if limiter is not None else (lambda v: v)
    u1 = lim(u + dt * L(u))
    _check_finite(u1, time, 1)
    u2 = lim(0.75 * u + 0.25 * (u1 + dt * L(u1)))
    _check_finite(u2, time, 2)
    u3 = lim(u / 3.0 + 2.0 / 3.0 * (u2 + dt * L(u2)))
    _check_finite(u3, time, 3)
    return u3


def choose_dt(field, model, controls, h_min=None, params=None):
    """Step size from the current state.

    standard: 1D  dt = CFL dx_min / max|H1|
              2D  dt = CFL / (max|H1| / dx_min + max|H2| / dy_min) on rectangles,
                  dt = CFL d_min / max|grad_p H| on triangles (d = inscribed diameter)
    p43:      dt = CFL dx_min^(4/3)
    """
    mesh = field.mesh
    if controls.dt_law == "p43":
        h = h_min if h_min is not None else _h_min(mesh)
        return controls.cfl * h ** (4.0 / 3.0)
    if params is None:
        from .solver1d import SchemeParams
        params = SchemeParams(k=field.basis.degree, cfl=controls.cfl)
    op = operator_for(field, model, params)
    return _standard_dt(op, field.coeffs, controls.cfl, h_min)


def _h_min(mesh):
    if isinstance(mesh, Mesh1D):
        return float(np.min(mesh.widths))
    if isinstance(mesh, CartMesh2D):
        return float(min(np.min(mesh.dx), np.min(mesh.dy)))
    return float(np.min(4.0 * mesh.areas / _perimeters(mesh)))


def _perimeters(mesh):
    return mesh.edge_lengths[mesh.elem_edges].sum(axis=1)


def _standard_dt(op, coeffs, cfl, h_min=None):
    if isinstance(op, Scheme1D):
        h = h_min if h_min is not None else float(np.min(op.mesh.widths))
        return cfl * h / max(op.max_speed(coeffs), SPEED_FLOOR)
    s1, s2 = op.max_speeds(coeffs)
    if isinstance(op.mesh, CartMesh2D):
        rate = max(s1, SPEED_FLOOR) / op.dx_min + max(s2, SPEED_FLOOR) / op.dy_min
        return cfl / rate
    h = h_min if h_min is not None else op.tri_length
    return cfl * h / max(np.hypot(s1, s2), SPEED_FLOOR)


# ---------------------------------------------------------------------------
# limiters


def minmod(*args):
    """Componentwise minmod of equally shaped arrays."""
    a = np.stack(np.broadcast_arrays(*args))
    s = np.sign(a[0])
    same = np.all(np.sign(a) == s, axis=0)
    return np.where(same, s * np.min(np.abs(a), axis=0), 0.0)


def minmod_limit_coeffs(coeffs, mesh):
    """Plain (M = 0) minmod on the linear part of 1D Legendre coefficients."""
    c = np.asarray(coeffs, dtype=float)
    mean = c[:, 0] / np.sqrt(2.0)
    s = c[:, 1] * np.sqrt(6.0)           # end-to-end change of the P1 part
    if mesh.boundary == "periodic":
        fwd = np.roll(mean, -1) - mean
        bwd = mean - np.roll(mean, 1)
    else:
        # a missing neighbour drops out of the minmod
        fwd = np.append(mean[1:] - mean[:-1], np.nan)
        bwd = np.insert(mean[1:] - mean[:-1], 0, np.nan)
        fwd = np.where(np.isnan(fwd), s, fwd)
        bwd = np.where(np.isnan(bwd), s, bwd)
    s_lim = minmod(s, fwd, bwd)
    # differences at round-off level (e.g. globally linear data) do not count
    scale = np.maximum(np.abs(s), np.abs(mean).max(initial=0.0) * 1e-3)
    changed = np.abs(s_lim - s) > 1e-12 * np.maximum(scale, 1e-300)
    if not np.any(changed):
        return c
    out = c.copy()
    out[changed, 1] = s_lim[changed] / np.sqrt(6.0)
    out[changed, 2:] = 0.0
    return out


def minmod_limit(field):
    if not isinstance(field.mesh, Mesh1D):
        raise TypeError("minmod_limit works on 1D fields")
    return field.copy(minmod_limit_coeffs(field.coeffs, field.mesh))


def moment_limit_coeffs(coeffs, mesh, modes):
    """Hierarchical moment limiter on a Cartesian mesh.

    Coefficients are converted to unnormalized Legendre moments u_ij. For
    each total degree m = k..1 every moment with i + j = m is replaced by
    minmod(u_ij, a_i Dx u_{i-1,j}, a_j Dy u_{i,j-1}) using forward and
    backward neighbour differences, a_i = 1 / (2 (2i - 1)). A cell stops as
    soon as a whole degree level is left unchanged. Means are untouched.
    """
    c = np.asarray(coeffs, dtype=float)
    nx, ny = mesh.nx, mesh.ny
    modes = [tuple(m) for m in modes]
    index = {m: n for n, m in enumerate(modes)}
    scale = np.array([np.sqrt((2 * i + 1) * (2 * j + 1)) / 2.0 for i, j in modes])
    u = (c * scale).reshape(nx, ny, -1)
    k = max(i + j for i, j in modes)
    px, py = mesh.boundary

    def diffs(arr, axis, periodic):
        if periodic:
            fwd = np.roll(arr, -1, axis=axis) - arr
            bwd = arr - np.roll(arr, 1, axis=axis)
            return fwd, bwd
        d = np.diff(arr, axis=axis)
        pad = np.full_like(np.take(arr, [0], axis=axis), np.nan)
        return np.concatenate([d, pad], axis=axis), np.concatenate([pad, d], axis=axis)

    active = np.ones((nx, ny), dtype=bool)
    new = u.copy()
    for m in range(k, 0, -1):
        if not np.any(active):
            break
        level_changed = np.zeros((nx, ny), dtype=bool)
        for i in range(m, -1, -1):
            j = m - i
            if (i, j) not in index:
                continue
            n = index[(i, j)]
            val = u[..., n]
            args = [val]
            if i > 0:
                f, b = diffs(u[..., index[(i - 1, j)]], 0, px == "periodic")
                a = 1.0 / (2.0 * (2 * i - 1))
                args += [np.where(np.isnan(f), val, a * f), np.where(np.isnan(b), val, a * b)]
            if j > 0:
                f, b = diffs(u[..., index[(i, j - 1)]], 1, py == "periodic")
                a = 1.0 / (2.0 * (2 * j - 1))
                args += [np.where(np.isnan(f), val, a * f), np.where(np.isnan(b), val, a * b)]
            lim = minmod(*args)
            upd = active & (lim != val)
            new[..., n] = np.where(active, lim, val)
            level_changed |= upd
        active &= level_changed
    return (new.reshape(nx * ny, -1) / scale)


def moment_limit(field):
    if not isinstance(field.mesh, CartMesh2D):
        raise TypeError("moment_limit works on Cartesian 2D fields")
    return field.copy(moment_limit_coeffs(field.coeffs, field.mesh, field.basis.modes))


def limiter_for(field, name):
    """Coefficient-level limiter callable, or None."""
    if name in (None, "none"):
        return None
    if name == "minmod":
        if not isinstance(field.mesh, Mesh1D):
            raise ValueError("the minmod limiter is available on 1D meshes only")
        mesh = field.mesh
        return lambda c: minmod_limit_coeffs(c, mesh)
    if name == "moment":
        if not isinstance(field.mesh, CartMesh2D):
            raise ValueError("the moment limiter is available on Cartesian meshes only")
        mesh, modes = field.mesh, field.basis.modes
        return lambda c: moment_limit_coeffs(c, mesh, modes)
    raise ValueError(f"unknown limiter {name!r}")


@dataclass
class RunStats:
    steps: int
    dt_min: float
    dt_max: float


def integrate(field, model, params, t_final, callback=None, max_steps=10_000_000):
    """Advance ``field`` to ``t_final``; returns (new field, RunStats)."""
    controls = TimeControls(params.cfl, t_final, params.dt_law, max_steps)
    op = operator_for(field, model, params)
    lim = limiter_for(field, params.limiter)
    u = field.coeffs.copy()
    if lim is not None:
        u = lim(u)
    t = float(field.time)
    h_min = _h_min(field.mesh)
    steps, dts = 0, []
    while t < t_final * (1 - 1e-14) and t_final - t > 1e-15:
        if controls.dt_law == "p43":
            dt = controls.cfl * h_min ** (4.0 / 3.0)
        else:
            dt = _standard_dt(op, u, controls.cfl)
        dt = min(dt, t_final - t)
        u = tvd_rk3_step(u, dt, op.rhs, lim, t)
        t = t + dt
        steps += 1
        dts.append(dt)
        if callback is not None:
            callback(t, u)
        if steps >= max_steps:
            raise RuntimeError(f"step limit {max_steps} reached at t={t:.6g}")
    stats = RunStats(steps, min(dts) if dts else 0.0, max(dts) if dts else 0.0)
    return field.copy(u, time=t_final if steps else field.time), stats
