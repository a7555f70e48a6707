"""Semi-discrete DG operator for phi_t + H(phi_x, x) = 0 on a 1D mesh.

For cell I_j and test function v the rate is

    M dphi/dt = - int_{I_j} H(phi_x, x) v dx
                - min(H~_{j+1/2}, 0) [phi] v^-_{j+1/2}
                - max(H~_{j-1/2}, 0) [phi] v^+_{j-1/2}
                + C dx_j visc_{j+1/2} [phi_x] v^-_{j+1/2}
                + C dx_j visc_{j-1/2} [phi_x] v^+_{j-1/2}

with [u] = u^+ - u^- (right limit minus left limit) and visc = S - |H~|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import gauss_rule
from .field import InterfaceTrace, element_maps
from .riemann import roe_data

LIMITERS = ("none", "minmod", "moment")
DT_LAWS = ("standard", "p43")


@dataclass(frozen=True)
class SchemeParams:
    k: int = 2
    C: float = 0.25
    cfl: float = 0.1
    limiter: str = "none"
    dt_law: str = "standard"
    # None selects the default degree 2k; raise it for quadrature studies
    volume_degree: int | None = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"polynomial degree must be an integer >= 1, got {self.k}")
        if not self.C >= 0:
            raise ValueError(f"penalty constant must be nonnegative, got {self.C}")
        if not self.cfl > 0:
            raise ValueError(f"CFL number must be positive, got {self.cfl}")
        if self.limiter not in LIMITERS:
            raise ValueError(f"unknown limiter {self.limiter!r}; expected one of {LIMITERS}")
        if self.dt_law not in DT_LAWS:
            raise ValueError(f"unknown dt law {self.dt_law!r}; expected one of {DT_LAWS}")

    @property
    def vol_degree(self):
        return 2 * self.k if self.volume_degree is None else int(self.volume_degree)

    @property
    def face_points(self):
        return self.k + 1


class Scheme1D:
    """Precomputed tables for one (mesh, basis, model, params) combination."""

    def __init__(self, mesh, basis, model, params):
        if model.dim != 1:
            raise ValueError(f"{model.name} is not a 1D Hamiltonian")
        self.mesh, self.basis, self.model, self.params = mesh, basis, model, params
        rule = gauss_rule(params.vol_degree // 2 + 1)
        self.weights = rule.weights
        self.V, self.D = basis.tabulate(rule.points)
        maps = element_maps(mesh)
        self.half = maps.jac                      # dx_j / 2
        self.xq = maps.to_physical(np.arange(mesh.n_cells)[:, None], rule.points[None, :])
        ends = np.array([-1.0, 1.0])
        ve, de = basis.tabulate(ends)
        self.v_left, self.v_right = ve[0], ve[1]
        self.d_left, self.d_right = de[0], de[1]
        N = mesh.n_cells
        if mesh.boundary == "periodic":
            # interface i sits at the left end of cell i
            self.iface_left = (np.arange(N) - 1) % N
            self.iface_right = np.arange(N)
            self.iface_x = mesh.nodes[:-1]
        elif mesh.boundary == "outflow":
            # boundary interfaces copy the interior trace and contribute nothing
            self.iface_left = np.arange(N - 1)
            self.iface_right = np.arange(1, N)
            self.iface_x = mesh.nodes[1:-1]
        else:
            raise ValueError(f"unsupported 1D boundary kind {mesh.boundary!r}")

    def gradients(self, coeffs):
        """phi_x at the volume quadrature points, shape (N, Q)."""
        return (coeffs @ self.D.T) / self.half[:, None]

    def traces(self, coeffs):
        """(phi^-, phi^+, p^-, p^+) at every interior/periodic interface."""
        cl = coeffs[self.iface_left]
        cr = coeffs[self.iface_right]
        phi_m = cl @ self.v_right
        phi_p = cr @ self.v_left
        p_m = (cl @ self.d_right) / self.half[self.iface_left]
        p_p = (cr @ self.d_left) / self.half[self.iface_right]
        return phi_m, phi_p, p_m, p_p

    def interface_roe(self, coeffs):
        phi_m, phi_p, p_m, p_p = self.traces(coeffs)
        x = self.iface_x
        return roe_data(self.model, p_m, p_p, 0.0, x, x), phi_p - phi_m, p_p - p_m

    def rhs(self, coeffs):
        C = self.params.C
        px = self.gradients(coeffs)
        Hq = self.model.H(px, self.xq, 0)
        out = -self.half[:, None] * ((Hq * self.weights) @ self.V)

        roe, jump, pjump = self.interface_roe(coeffs)
        speed = roe.roe_speed
        L, R = self.iface_left, self.iface_right
        if C > 0:
            visc = roe.visc
            pen_l = C * 2.0 * self.half[L] * visc * pjump
            pen_r = C * 2.0 * self.half[R] * visc * pjump
        else:
            pen_l = pen_r = 0.0
        # right end of the left cell (test trace v^-)
        left_rate = -np.minimum(speed, 0.0) * jump + pen_l
        # left end of the right cell (test trace v^+)
        right_rate = -np.maximum(speed, 0.0) * jump + pen_r
        np.add.at(out, L, left_rate[:, None] * self.v_right[None, :])
        np.add.at(out, R, right_rate[:, None] * self.v_left[None, :])
        return out / self.half[:, None]

    def max_speed(self, coeffs):
        px = self.gradients(coeffs)
        return float(np.max(np.abs(self.model.H1(px, self.xq, 0))))

    __call__ = rhs


_SCHEMES = {}


def scheme_1d(mesh, basis, model, params):
    key = (id(mesh), basis.kind, basis.degree, model.name, params)
    cached = _SCHEMES.get(key)
    if cached is None or cached.mesh is not mesh or cached.model is not model:
        cached = Scheme1D(mesh, basis, model, params)
        if len(_SCHEMES) > 64:
            _SCHEMES.clear()
        _SCHEMES[key] = cached
    return cached


def assemble_rhs_1d(field, model, params):
    """Coefficient time-derivatives for a field on a Mesh1D."""
    return scheme_1d(field.mesh, field.basis, model, params).rhs(field.coeffs)


def boundary_traces_1d(field, side):
    """Trace at the left (side=-1) or right (side=+1) domain boundary.

    Periodic meshes wrap to the opposite cell; outflow boundaries copy the
    interior trace so every jump vanishes.
    """
    mesh = field.mesh
    N = mesh.n_cells
    if side not in (-1, 1):
        raise ValueError("side must be -1 (left boundary) or +1 (right boundary)")
    first, last = np.array([0]), np.array([N - 1])
    v0, g0 = field.evaluate_reference(first, np.array([-1.0]))
    vN, gN = field.evaluate_reference(last, np.array([1.0]))
    if mesh.boundary == "periodic":
        vm, gm, vp, gp = vN, gN, v0, g0
    elif side < 0:
        vm, gm, vp, gp = v0, g0, v0, g0
    else:
        vm, gm, vp, gp = vN, gN, vN, gN
    x = mesh.a if side < 0 else mesh.b
    return InterfaceTrace(np.array([x]), float(vm[0]), float(vp[0]),
                          np.array([gm[0]]), np.array([gp[0]]),
                          np.array([1.0]), np.array([0.0]))
