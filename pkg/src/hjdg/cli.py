"""Command-line runner: single runs, convergence studies, C sweeps, plots and mesh tools.

Exit codes: 0 success, 2 configuration error, 3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import analysis as an
from .cases import CASES, get_case, make_params
from .field import read_samples_csv, write_coefficients_csv, write_samples_csv
from .mesh import (CartMesh2D, Mesh1D, MeshError, disk_mesh, graded_square_mesh,
                   load_tri_mesh, save_tri_mesh, triangulate_rectangle)
from .solver1d import DT_LAWS, LIMITERS
from .timeloop import NumericalBlowUp, integrate

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP = 0, 2, 3
NONCONVERGENT_LINF = 0.1


class ConfigError(ValueError):
    """Invalid user configuration."""


@dataclass(frozen=True)
class RunConfig:
    case: str
    k: int | None = None
    n: int | None = None
    tfinal: float | None = None
    c: float = 0.25
    cfl: float | None = None
    limiter: str | None = None
    dt_law: str | None = None
    seed: int = 0
    perturb: float = 0.0
    mesh: str | None = None
    out: str = "."
    resolution: int = 4

    def validate(self):
        if self.case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}; choose from: {', '.join(CASES)}")
        case = get_case(self.case)
        if self.k is not None and self.k < 1:
            raise ConfigError(f"--k must be at least 1, got {self.k}")
        if self.n is not None and self.n < 1:
            raise ConfigError(f"--n must be at least 1, got {self.n}")
        if self.c < 0:
            raise ConfigError(f"--c must be nonnegative (penalty constant), got {self.c}")
        if self.cfl is not None and not self.cfl > 0:
            raise ConfigError(f"--cfl must be positive, got {self.cfl}")
        if self.tfinal is not None and self.tfinal < 0:
            raise ConfigError(f"--tfinal must be nonnegative, got {self.tfinal}")
        if self.limiter is not None and self.limiter not in LIMITERS:
            raise ConfigError(f"--limiter must be one of {LIMITERS}")
        if self.dt_law is not None and self.dt_law not in DT_LAWS:
            raise ConfigError(f"--dt-law must be one of {DT_LAWS}")
        if not 0 <= self.perturb < 0.5:
            raise ConfigError(f"--perturb must lie in [0, 0.5), got {self.perturb}")
        if self.perturb and case.mesh_kind != "interval":
            raise ConfigError("--perturb is only available for 1D cases")
        if self.mesh is not None:
            if case.mesh_kind != "triangle":
                raise ConfigError(f"case {self.case} runs on a {case.mesh_kind} mesh; --mesh needs a triangle case")
            if not Path(self.mesh).is_file():
                raise ConfigError(f"mesh file not found: {self.mesh}")
        limiter = self.limiter or case.limiter
        if limiter == "minmod" and case.mesh_kind != "interval":
            raise ConfigError("the minmod limiter is for 1D cases; use 'moment' on rectangles")
        if limiter == "moment" and case.mesh_kind != "rectangle":
            raise ConfigError("the moment limiter needs a Cartesian (rectangle) case")
        if self.case == "quartic1d" and limiter == "none":
            warnings.warn("quartic1d without a limiter does not converge to the viscosity solution",
                          stacklevel=2)
        return self

    def params(self):
        case = get_case(self.case)
        try:
            return make_params(case, k=self.k, C=self.c, cfl=self.cfl,
                               limiter=self.limiter, dt_law=self.dt_law)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def build_mesh(self, n=None):
        case = get_case(self.case)
        n = self.n if n is None else n
        try:
            return case.build_mesh(n, perturb=self.perturb, seed=self.seed, mesh_path=self.mesh)
        except (MeshError, OSError, ValueError) as exc:
            raise ConfigError(f"cannot build mesh: {exc}") from None

    @property
    def t_final(self):
        return get_case(self.case).t_final if self.tfinal is None else self.tfinal


# ---------------------------------------------------------------------------
# config handling


def read_config_file(path):
    """Flat ``key = value`` file; blank lines and ``#`` comments are ignored."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    out = {}
    for num, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, value):
    kind = _CONFIG_TYPES.get(key, "str")
    try:
        if "int" in kind:
            return int(value)
        if "float" in kind:
            return float(value)
    except ValueError:
        raise ConfigError(f"config value for {key} is not a number: {value!r}") from None
    return value


def build_config(args):
    """RunConfig from parsed arguments; explicit flags override config-file entries."""
    values = {}
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            if key not in _CONFIG_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = _coerce(key, value)
    for name in _CONFIG_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    if "case" not in values:
        raise ConfigError("--case is required (on the command line or in the config file)")
    return RunConfig(**values).validate()


def _set_threads(args):
    limit = getattr(args, "threads", None) or os.environ.get("HJDG_THREADS")
    if not limit:
        return None
    try:
        limit = int(limit)
    except ValueError:
        raise ConfigError(f"thread count must be an integer, got {limit!r}") from None
    if limit < 1:
        raise ConfigError("thread count must be at least 1")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=limit)


# ---------------------------------------------------------------------------
# subcommands


def _run_one(cfg, mesh=None, n=None, C=None):
    case = get_case(cfg.case)
    params = cfg.params() if C is None else replace(cfg.params(), C=C)
    mesh = cfg.build_mesh(n) if mesh is None else mesh
    field0 = case.initial_field(mesh, params.k)
    field, stats = integrate(field0, case.model(), params, cfg.t_final)
    exact = case.exact()
    norms = None
    if exact is not None:
        try:
            norms = an.error_norms(field, exact)
        except an.OracleError:
            norms = None
    return field, stats, norms


def _summary(cfg, field, stats, norms, C=None):
    C = cfg.c if C is None else C
    parts = [f"case={cfg.case}", f"t={field.time:.6g}", f"steps={stats.steps}", f"C={C:g}"]
    if norms is not None:
        parts += [f"L1={norms[0]:.6e}", f"L2={norms[1]:.6e}", f"Linf={norms[2]:.6e}"]
        if norms[2] > NONCONVERGENT_LINF:
            parts.append("NONCONVERGENT")
    return " ".join(parts)


def cmd_run(args):
    cfg = build_config(args)
    field, stats, norms = _run_one(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_coefficients_csv(field, out / f"{cfg.case}_coeffs.csv")
    write_samples_csv(field, out / f"{cfg.case}_samples.csv", cfg.resolution)
    print(_summary(cfg, field, stats, norms))
    return EXIT_OK


def _int_list(text):
    try:
        return [int(v) for v in str(text).replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"expected a list of integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(v) for v in str(text).replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"expected a list of numbers, got {text!r}") from None


def _mesh_size(mesh):
    if isinstance(mesh, Mesh1D):
        return float(np.max(mesh.widths))
    if isinstance(mesh, CartMesh2D):
        return float(max(np.max(mesh.dx), np.max(mesh.dy)))
    return float(mesh.h)


def convergence_study(cfg, resolutions, k):
    """ConvergenceReport for one case and degree over a list of N."""
    case = get_case(cfg.case)
    if case.exact() is None:
        raise ConfigError(f"case {cfg.case} has no reference solution; converge is unavailable")
    k_cfg = replace(cfg, k=k)
    errors, hs = [], []
    for n in resolutions:
        mesh = k_cfg.build_mesh(n)
        field, stats, _ = _run_one(k_cfg, mesh=mesh)
        try:
            errors.append(an.error_norms(field, case.exact()))
        except an.OracleError as exc:
            raise ConfigError(str(exc)) from None
        hs.append(_mesh_size(mesh))
    params = k_cfg.params()
    meta = dict(case=cfg.case, k=k, C=params.C, cfl=params.cfl, t=cfg.t_final,
                limiter=params.limiter, mesh=case.mesh_kind, perturb=cfg.perturb, seed=cfg.seed)
    try:
        return an.convergence_orders(errors, hs, labels=resolutions, metadata=meta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_converge(args):
    cfg = build_config(args)
    resolutions = _int_list(args.ns)
    if len(resolutions) < 2:
        raise ConfigError("--ns needs at least two resolutions")
    ks = _int_list(args.ks) if args.ks else [cfg.params().k]
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in ks:
        report = convergence_study(cfg, resolutions, k)
        text = report.to_csv() if args.format == "csv" else report.to_markdown()
        suffix = "csv" if args.format == "csv" else "md"
        tag = f"_perturb{cfg.perturb:g}_seed{cfg.seed}" if cfg.perturb else ""
        path = out / f"converge_{cfg.case}_k{k}{tag}.{suffix}"
        path.write_text(text)
        print(f"# {cfg.case} k={k} -> {path}")
        print(text, end="")
    return EXIT_OK


def cmd_sweep_c(args):
    cfg = build_config(args)
    values = _float_list(args.cs)
    if not values:
        raise ConfigError("--cs needs at least one value")
    if any(v < 0 for v in values):
        raise ConfigError("penalty constants must be nonnegative")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    mesh = cfg.build_mesh()
    rows = []
    for C in values:
        field, stats, norms = _run_one(cfg, mesh=mesh, C=C)
        write_samples_csv(field, out / f"{cfg.case}_C{C:g}_samples.csv", cfg.resolution)
        print(_summary(cfg, field, stats, norms, C=C))
        rows.append((C, norms))
    with open(out / f"sweep_c_{cfg.case}.csv", "w") as fh:
        fh.write("C,L1,L2,Linf,flag\n")
        for C, norms in rows:
            if norms is None:
                fh.write(f"{C:g},,,,\n")
            else:
                flag = "nonconvergent" if norms[2] > NONCONVERGENT_LINF else ""
                fh.write(f"{C:g},{norms[0]:.6e},{norms[1]:.6e},{norms[2]:.6e},{flag}\n")
    return EXIT_OK


def diagonal_cut(data, width=None):
    """Samples near the line y = x, returned as (s, phi) with s = (x + y)/sqrt(2)."""
    x, y, phi = data[:, 0], data[:, 1], data[:, 2]
    dist = np.abs(y - x) / math.sqrt(2.0)
    if width is None:
        # keep roughly one sample row on each side of the diagonal
        spacing = np.sqrt((np.ptp(x) * np.ptp(y)) / len(x))
        width = spacing
    keep = dist <= width
    s = (x[keep] + y[keep]) / math.sqrt(2.0)
    order = np.argsort(s, kind="stable")
    return s[order], phi[keep][order]


def cmd_plot(args):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    dumps = []
    for path in args.samples:
        try:
            header, data = read_samples_csv(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read samples {path}: {exc}") from None
        dumps.append((path, header, data))
    headers = {tuple(h) for _, h, _ in dumps}
    if len(headers) != 1:
        raise ConfigError("sample dumps have mismatched columns")
    header = dumps[0][1]
    case = get_case(args.case) if args.case else None
    t = args.tfinal if args.tfinal is not None else (case.t_final if case else None)
    exact = case.exact() if case else None

    fig, ax = plt.subplots(figsize=(6, 4))
    if header == ["x", "phi"]:
        for path, _, data in dumps:
            order = np.argsort(data[:, 0], kind="stable")
            ax.plot(data[order, 0], data[order, 1], "o", mfc="none", ms=4, label=Path(path).stem)
        if exact is not None:
            xs = np.linspace(data[:, 0].min(), data[:, 0].max(), 801)
            ax.plot(xs, exact(xs, t), "-", color="k", lw=1.2, label="exact")
        ax.set_xlabel("x")
    elif args.cut == "diagonal":
        for path, _, data in dumps:
            s, phi = diagonal_cut(data)
            ax.plot(s, phi, "o", mfc="none", ms=4, label=Path(path).stem)
            if args.cut_data:
                np.savetxt(args.cut_data, np.column_stack([s, phi]), delimiter=",",
                           header="s,phi", comments="", fmt="%.17g")
        if exact is not None:
            ss = np.linspace(s.min(), s.max(), 801)
            xy = ss / math.sqrt(2.0)
            ax.plot(ss, exact(xy, xy, t), "-", color="k", lw=1.2, label="exact")
        ax.set_xlabel("(x + y) / sqrt(2) along y = x")
    else:
        data = dumps[0][2]
        tri = ax.tricontourf(data[:, 0], data[:, 1], data[:, 2], levels=30)
        fig.colorbar(tri, ax=ax)
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    if header == ["x", "phi"] or args.cut == "diagonal":
        ax.set_ylabel("phi")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, format="svg", metadata={"Date": None})
    plt.close(fig)
    print(f"wrote {args.out}")
    return EXIT_OK


def _load_mesh_for_info(args):
    if args.mesh:
        if not Path(args.mesh).is_file():
            raise ConfigError(f"mesh file not found: {args.mesh}")
        try:
            return load_tri_mesh(args.mesh)
        except MeshError as exc:
            raise ConfigError(f"cannot read mesh: {exc}") from None
    if not args.case:
        raise ConfigError("mesh-info needs --mesh or --case")
    if args.case not in CASES:
        raise ConfigError(f"unknown case {args.case!r}")
    return get_case(args.case).build_mesh(args.n)


def cmd_mesh_info(args):
    mesh = _load_mesh_for_info(args)
    if isinstance(mesh, Mesh1D):
        w = mesh.widths
        print(f"kind=interval cells={mesh.n_cells} domain=[{mesh.a:g},{mesh.b:g}] "
              f"boundary={mesh.boundary} dx_min={w.min():.6g} dx_max={w.max():.6g}")
    elif isinstance(mesh, CartMesh2D):
        print(f"kind=rectangle cells={mesh.n_elements} nx={mesh.nx} ny={mesh.ny} "
              f"boundary={','.join(mesh.boundary)} dx_min={np.min(mesh.dx):.6g} dy_min={np.min(mesh.dy):.6g} "
              f"area={mesh.area:.6g}")
    else:
        print(f"kind=triangle elements={mesh.n_elements} nodes={len(mesh.nodes)} edges={mesh.n_edges} "
              f"boundary_edges={len(mesh.boundary_edges)} periodic_pairs={len(mesh.periodic_pairs)} "
              f"h={mesh.h:.6g} area={mesh.area:.6g} min_area={mesh.areas.min():.6g}")
    return EXIT_OK


def cmd_gen_mesh(args):
    if args.kind == "rectangle":
        a, b, c, d = _float_list(args.domain)
        mesh = triangulate_rectangle(a, b, c, d, args.n, args.n, pattern=args.pattern,
                                     periodic=args.periodic)
    elif args.kind == "disk":
        mesh = disk_mesh(n_rings=args.n)
    else:
        mesh = graded_square_mesh(n=args.n, seed=args.seed or 0)
    save_tri_mesh(mesh, args.out)
    print(f"wrote {args.out}: {mesh.n_elements} triangles, h={mesh.h:.6g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _run_options(p, sweep=False):
    p.add_argument("--case", help="case name: " + ", ".join(CASES))
    p.add_argument("--config", help="flat key=value file; command-line flags take precedence")
    p.add_argument("--k", type=int, help="polynomial degree")
    p.add_argument("--n", type=int, help="cells per direction (or mesh size parameter)")
    p.add_argument("--tfinal", type=float, help="final time (default: the case's)")
    if not sweep:
        p.add_argument("--c", type=float, help="penalty constant C (default 0.25)")
    p.add_argument("--cfl", type=float, help="CFL number (default: the case's)")
    p.add_argument("--limiter", choices=LIMITERS)
    p.add_argument("--dt-law", dest="dt_law", choices=DT_LAWS)
    p.add_argument("--seed", type=int, help="seed for mesh perturbation")
    p.add_argument("--perturb", type=float, help="random interface perturbation fraction (1D)")
    p.add_argument("--mesh", help="triangle mesh file (native format or Gmsh 2.2)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--resolution", type=int, help="samples per element direction in sampled CSVs")
    p.add_argument("--threads", type=int, help="cap on BLAS threads (also HJDG_THREADS)")


def build_parser():
    parser = _Parser(prog="hjdg", description="DG solver for Hamilton-Jacobi equations")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="single run; writes coefficient and sample CSVs")
    _run_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("converge", help="convergence table over a list of resolutions")
    _run_options(p)
    p.add_argument("--ns", required=True, help="resolutions, e.g. '40,80,160'")
    p.add_argument("--ks", help="degrees, e.g. '1,2,3' (default: --k or the case's)")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("sweep-c", help="repeat one run over several penalty constants")
    _run_options(p, sweep=True)
    p.add_argument("--cs", required=True, help="penalty constants, e.g. '0,0.125,0.25,0.5,1'")
    p.set_defaults(func=cmd_sweep_c)

    p = sub.add_parser("plot", help="SVG plot from sampled CSV dumps")
    p.add_argument("samples", nargs="+", help="sampled CSV files (x,phi or x,y,phi)")
    p.add_argument("--case", help="overlay this case's exact solution")
    p.add_argument("--tfinal", type=float, help="time of the dumps (default: the case's)")
    p.add_argument("--cut", choices=("none", "diagonal"), default="none",
                   help="2D: plot the cut along y = x instead of a contour map")
    p.add_argument("--cut-data", dest="cut_data", help="also write the cut as CSV")
    p.add_argument("--out", required=True, help="SVG file")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("mesh-info", help="summary of a mesh file or a case's mesh")
    p.add_argument("--mesh")
    p.add_argument("--case")
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_mesh_info)

    p = sub.add_parser("gen-mesh", help="write a triangle mesh in the native format")
    p.add_argument("--kind", choices=("rectangle", "disk", "graded"), default="rectangle")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--domain", default="-2,2,-2,2", help="a,b,c,d for --kind rectangle")
    p.add_argument("--pattern", choices=("diagonal", "alternating"), default="alternating")
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_mesh)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        limits = _set_threads(args)
        try:
            return args.func(args)
        finally:
            if limits is not None:
                limits.restore_original_limits()
    except ConfigError as exc:
        print(f"hjdg: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalBlowUp as exc:
        print(f"hjdg: numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (MeshError, an.OracleError) as exc:
        print(f"hjdg: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
