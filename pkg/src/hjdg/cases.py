"""Named test problems: Hamiltonian, domain, initial data, boundary and times.

Each case knows how to build its mesh at a given resolution and, where one
exists, how to produce a reference solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, Optional

import numpy as np

from . import analysis as an
from .field import basis_for, project
from .hamiltonian import HamiltonianModel, catalog, reduce_diagonal
from .mesh import (build_cartesian, build_uniform_1d, disk_mesh, graded_square_mesh,
                   load_tri_mesh, perturb_1d, triangulate_rectangle)
from .solver1d import SchemeParams
from .timeloop import integrate

PI = math.pi


@dataclass(frozen=True)
class Case:
    name: str
    hamiltonian: str
    mesh_kind: str                  # interval | rectangle | triangle
    domain: tuple
    boundary: str                   # periodic | outflow
    phi0: Callable
    t_final: float
    description: str = ""
    n_default: int = 40
    k_default: int = 2
    cfl: float = 0.1
    limiter: str = "none"
    cfl_by_k: dict = dc_field(default_factory=dict)
    dt_law_by_k: dict = dc_field(default_factory=dict)
    mesh_builder: Optional[Callable] = None
    exact_kind: Optional[str] = None
    # data for 1D (or diagonal-reduced 2D) oracles
    dphi0_1d: Optional[Callable] = None
    phi0_1d: Optional[Callable] = None
    period_1d: float = 2 * PI
    slope_bound: float = 1.0        # max |phi0'|
    speed_max: float = 1.0          # max |H'| over the range of gradients
    singular_time: Optional[float] = None
    reduced: bool = False           # data depends on x + y only
    lagrangian: Optional[Callable] = None
    probes: tuple = ()
    # extra volume quadrature degree on top of 2k (Hamiltonians with kinks in p)
    volume_extra: int = 0
    # slopes (left, right) of piecewise-linear corner data
    corner_slopes: Optional[tuple] = None

    @property
    def dim(self):
        return 1 if self.mesh_kind == "interval" else 2

    def model(self) -> HamiltonianModel:
        return catalog(self.hamiltonian)

    def model_1d(self):
        if self.reduced:
            return reduce_diagonal(self.model(), self.lagrangian)
        return self.model()

    def characteristic_data(self):
        return self.model_1d(), self.phi0_1d, self.dphi0_1d, self.speed_max

    def default_cfl(self, k):
        return self.cfl_by_k.get(k, self.cfl)

    def default_dt_law(self, k):
        return self.dt_law_by_k.get(k, "standard")

    # ------------------------------------------------------------------
    def build_mesh(self, n=None, perturb=0.0, seed=0, mesh_path=None):
        n = self.n_default if n is None else int(n)
        if mesh_path is not None:
            if self.mesh_kind != "triangle":
                raise ValueError(f"case {self.name} runs on a {self.mesh_kind} mesh, not a mesh file")
            return load_tri_mesh(mesh_path)
        if self.mesh_builder is not None:
            return self.mesh_builder(n)
        if self.mesh_kind == "interval":
            a, b = self.domain
            mesh = build_uniform_1d(a, b, n, self.boundary)
            if perturb:
                mesh = perturb_1d(mesh, perturb, seed)
            return mesh
        if perturb:
            raise ValueError("mesh perturbation is only available in 1D")
        a, b, c, d = self.domain
        if self.mesh_kind == "rectangle":
            return build_cartesian(a, b, c, d, n, n, (self.boundary, self.boundary))
        return triangulate_rectangle(a, b, c, d, n, n, pattern="alternating",
                                     periodic=self.boundary == "periodic")

    def initial_field(self, mesh, k):
        return project(mesh, basis_for(mesh, k), self.phi0)

    # ------------------------------------------------------------------
    def exact(self) -> Optional[an.ExactSolution]:
        kind = self.exact_kind
        if kind is None:
            return None
        if kind == "linear-sine":
            return an.ExactSolution(an.linear_sine_transport, "analytic")
        if kind == "window-min":
            return an.ExactSolution(an.window_min_sine, "analytic", valid_until=PI)
        if kind == "characteristics":
            return an.ExactSolution(lambda x, t: an.characteristics_oracle(self, x, t),
                                    "characteristic", valid_until=self.singular_time or math.inf)
        if kind == "convex-1d":
            def evaluate(x, t):
                if self.singular_time is not None and t < self.singular_time:
                    return an.characteristics_oracle(self, x, t)
                return an.hopf_lax_oracle(self, x, t)
            return an.ExactSolution(evaluate, "hopf-lax")
        if kind == "hopf-lax":
            return an.ExactSolution(lambda x, t: an.hopf_lax_oracle(self, x, t), "hopf-lax")
        if kind == "hopf-corner":
            model = self.model()
            u_left, u_right = self.corner_slopes
            return an.ExactSolution(
                lambda x, t: an.hopf_corner(lambda p: model.H(p, 0.0, 0), u_left, u_right, x, t),
                "hopf-corner")
        if kind == "lf-reference":
            def evaluate(x, t):
                return an.reference_lf_solver(self, t=t)(x)
            return an.ExactSolution(evaluate, "reference-solver")
        if kind == "diagonal":
            return an.ExactSolution(
                lambda x, y, t: an.characteristics_oracle(self, np.asarray(x) + np.asarray(y), t),
                "characteristic", dim=2, valid_until=self.singular_time or math.inf)
        if kind == "rotation":
            phi0 = self.phi0

            def evaluate(x, y, t):
                c, s = math.cos(t), math.sin(t)
                return phi0(x * c + y * s, -x * s + y * c)
            return an.ExactSolution(evaluate, "analytic", dim=2)
        if kind == "cross":
            return an.ExactSolution(an.cross_characteristics, "characteristic", dim=2,
                                    valid_until=1.0)
        raise ValueError(f"unknown reference kind {kind!r}")


# ---------------------------------------------------------------------------
# initial data


def _cone(x, y):
    r = np.sqrt((x - 0.4) ** 2 + (y - 0.4) ** 2)
    return np.where(r >= 0.3, 0.0, np.where(r > 0.1, 0.3 - r, 0.2))


def _gaussian(x, y, sigma=0.05):
    return np.exp(-((x - 0.4) ** 2 + (y - 0.4) ** 2) / (2 * sigma**2))


def _diag_cos(x, y):
    return -np.cos(0.5 * PI * (x + y))


def _surface0(x, y):
    return 1.0 - 0.25 * (np.cos(2 * PI * x) - 1.0) * (np.cos(2 * PI * y) - 1.0)


def _disk0(x, y):
    return -np.sin(0.5 * PI * (x**2 + y**2))


def _vshape(x):
    return np.abs(np.asarray(x) - PI)


_psi0 = lambda s: -np.cos(0.5 * PI * s)
_dpsi0 = lambda s: 0.5 * PI * np.sin(0.5 * PI * s)

_CASES = [
    Case("linsmth", "linsmth", "interval", (0.0, 2 * PI), "periodic", np.sin, 1.0,
         "linear transport with speed sin(x)", cfl_by_k={1: 0.3, 2: 0.1, 3: 0.05},
         dt_law_by_k={3: "p43"}, exact_kind="linear-sine"),
    Case("linnonsmth", "linnonsmth", "interval", (0.0, 2 * PI), "periodic", np.sin, 1.0,
         "linear transport with speed sign(cos x)", n_default=80, exact_kind="window-min"),
    Case("burgers1d", "burgers1d", "interval", (0.0, 2 * PI), "periodic", np.sin, 0.5,
         "Burgers with smooth data", exact_kind="convex-1d", phi0_1d=np.sin, dphi0_1d=np.cos,
         slope_bound=1.0, speed_max=1.0, singular_time=1.0),
    Case("burgers1d-vshape", "burgers1d", "interval", (0.0, 2 * PI), "periodic", _vshape, 1.0,
         "Burgers with a V-shaped corner that opens into a fan", n_default=80,
         exact_kind="hopf-lax", phi0_1d=_vshape, slope_bound=1.0, speed_max=1.0),
    Case("eikonal1d", "eikonal1d", "interval", (0.0, 2 * PI), "periodic", np.sin, 1.0,
         "eikonal |phi_x|", exact_kind="window-min", volume_extra=2, phi0_1d=np.sin),
    Case("cos1d", "cos1d", "interval", (-1.0, 1.0), "periodic", lambda x: -np.cos(PI * x),
         0.5 / PI**2, "nonconvex H = -cos(p + 1)", exact_kind="characteristics",
         phi0_1d=lambda x: -np.cos(PI * x), dphi0_1d=lambda x: PI * np.sin(PI * x),
         period_1d=2.0, slope_bound=PI, speed_max=1.0, singular_time=1.0 / PI**2),
    Case("quartic1d", "quartic1d", "interval", (-1.0, 1.0), "outflow",
         lambda x: -2.0 * np.abs(x), 1.0, "nonconvex quartic H with a corner",
         cfl=0.05, limiter="minmod", exact_kind="hopf-corner", corner_slopes=(2.0, -2.0),
         phi0_1d=lambda x: -2.0 * np.abs(x), period_1d=2.0, slope_bound=2.0, speed_max=3.0),
    Case("rotation", "rotation", "rectangle", (-1.0, 1.0, -1.0, 1.0), "periodic", _cone, 1.0,
         "solid-body rotation of a cone", exact_kind="rotation"),
    Case("rotation-smooth", "rotation", "rectangle", (-1.0, 1.0, -1.0, 1.0), "periodic",
         _gaussian, 1.0, "solid-body rotation of a narrow Gaussian", exact_kind="rotation"),
    Case("burgers2d", "burgers2d", "triangle", (-2.0, 2.0, -2.0, 2.0), "periodic", _diag_cos,
         0.5 / PI**2, "2D Burgers with data along x + y", n_default=16, exact_kind="diagonal",
         phi0_1d=_psi0, dphi0_1d=_dpsi0, period_1d=4.0, slope_bound=0.5 * PI,
         speed_max=2.0 * (PI + 1.0), singular_time=1.0 / PI**2, reduced=True,
         lagrangian=lambda v: v * v / 8.0 - v / 2.0),
    Case("cos2d", "cos2d", "triangle", (-2.0, 2.0, -2.0, 2.0), "periodic", _diag_cos,
         0.5 / PI**2, "nonconvex -cos(p + q + 1) with data along x + y", n_default=16,
         exact_kind="diagonal", phi0_1d=_psi0, dphi0_1d=_dpsi0, period_1d=4.0,
         slope_bound=0.5 * PI, speed_max=2.0, reduced=True),
    Case("crossderiv", "crossderiv", "rectangle", (-PI, PI, -PI, PI), "periodic",
         lambda x, y: np.sin(x) + np.cos(y), 0.8, "H = p q", exact_kind="cross"),
    Case("control", "control", "rectangle", (-PI, PI, -PI, PI), "periodic",
         lambda x, y: 0.0 * x, 1.0, "optimal-cost Hamiltonian with sign(q)"),
    Case("sinsum", "sinsum", "rectangle", (-1.0, 1.0, -1.0, 1.0), "outflow",
         lambda x, y: PI * (np.abs(y) - np.abs(x)), 1.0, "2D Riemann problem for sin(p + q)",
         n_default=41, limiter="moment"),
    Case("surface", "surface", "triangle", (0.0, 1.0, 0.0, 1.0), "periodic", _surface0, 0.6,
         "propagating surface on a periodic square", n_default=24,
         mesh_builder=lambda n: graded_square_mesh(n=n),
         probes=((0.5, 0.5), (0.25, 0.25), (0.1, 0.6))),
    Case("surface-disk", "surface", "triangle", (-1.0, 1.0, -1.0, 1.0), "outflow", _disk0, 0.6,
         "propagating surface on the unit disk", n_default=16,
         mesh_builder=lambda n: disk_mesh(n_rings=n),
         probes=((0.0, 0.0), (0.3, 0.2), (-0.5, 0.1))),
]

CASES = {c.name: c for c in _CASES}


def get_case(name):
    try:
        return CASES[name]
    except KeyError:
        raise KeyError(f"unknown case {name!r}; known: {', '.join(CASES)}") from None


# ---------------------------------------------------------------------------
# running


@dataclass
class RunResult:
    case: Case
    field: object
    params: SchemeParams
    steps: int
    norms: Optional[tuple] = None


def make_params(case, k=None, C=0.25, cfl=None, limiter=None, dt_law=None, volume_degree=None):
    k = case.k_default if k is None else int(k)
    if volume_degree is None and case.volume_extra:
        volume_degree = 2 * k + case.volume_extra
    return SchemeParams(
        k=k, C=C,
        cfl=case.default_cfl(k) if cfl is None else cfl,
        limiter=case.limiter if limiter is None else limiter,
        dt_law=case.default_dt_law(k) if dt_law is None else dt_law,
        volume_degree=volume_degree)


def simulate(case, k=None, n=None, t_final=None, mesh=None, with_norms=True, **kw):
    """Run a case; extra keywords go to :func:`make_params` or mesh building."""
    if isinstance(case, str):
        case = get_case(case)
    mesh_kw = {key: kw.pop(key) for key in ("perturb", "seed", "mesh_path") if key in kw}
    params = make_params(case, k=k, **kw)
    if mesh is None:
        mesh = case.build_mesh(n, **mesh_kw)
    t_final = case.t_final if t_final is None else t_final
    field0 = case.initial_field(mesh, params.k)
    result, stats = integrate(field0, case.model(), params, t_final)
    norms = None
    exact = case.exact()
    if with_norms and exact is not None:
        norms = an.error_norms(result, exact)
    return RunResult(case, result, params, stats.steps, norms)


def with_time(case, t_final):
    return replace(case, t_final=t_final)
