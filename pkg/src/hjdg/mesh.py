"""1D, Cartesian and triangular meshes.

Native triangle mesh file (ASCII)::

    nodes <N>
    x y                  (N lines)
    triangles <M>
    i j k                (M lines, 0-based node indices)
    periodic <P>         (optional)
    edge_a edge_b        (P lines, canonical edge indices)

Canonical edge indices number the unique edges sorted by (min node, max node).
Gmsh MSH 2.2 ASCII files are also read (3-node triangles only).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay, cKDTree

BOUNDARY_KINDS = ("periodic", "outflow")
PERIODIC_TOL = 1e-9


class MeshError(ValueError):
    pass


class MeshFormatError(MeshError):
    pass


class NonManifoldEdgeError(MeshError):
    pass


class DegenerateElementError(MeshError):
    pass


class PeriodicMatchError(MeshError):
    pass


def _check_boundary(kind):
    if kind not in BOUNDARY_KINDS:
        raise MeshError(f"unknown boundary kind {kind!r}; expected one of {BOUNDARY_KINDS}")
    return kind


# ---------------------------------------------------------------------------
# 1D


@dataclass(frozen=True, eq=False)
class Mesh1D:
    nodes: np.ndarray
    boundary: str = "periodic"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 3:
            raise MeshError("a 1D mesh needs at least two cells")
        if np.any(np.diff(nodes) <= 0):
            raise MeshError("interfaces must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        _check_boundary(self.boundary)

    @property
    def n_cells(self):
        return len(self.nodes) - 1

    @property
    def widths(self):
        return np.diff(self.nodes)

    @property
    def centers(self):
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])

    @property
    def h(self):
        return self.widths.max()

    @property
    def a(self):
        return self.nodes[0]

    @property
    def b(self):
        return self.nodes[-1]

    @property
    def length(self):
        return self.nodes[-1] - self.nodes[0]

    def locate(self, x):
        """Cell index containing each x (right-closed at the last cell)."""
        idx = np.searchsorted(self.nodes, x, side="right") - 1
        return np.clip(idx, 0, self.n_cells - 1)


def build_uniform_1d(a, b, N, boundary="periodic"):
    if not a < b:
        raise MeshError(f"need a < b, got [{a}, {b}]")
    if N < 2:
        raise MeshError(f"need at least 2 cells, got N={N}")
    return Mesh1D(np.linspace(a, b, N + 1), boundary)


def perturb_1d(mesh, fraction, seed):
    """Move each interior interface by U(-fraction, fraction) * uniform width."""
    if not 0 <= fraction < 0.5:
        raise MeshError(f"perturbation fraction must lie in [0, 0.5), got {fraction}")
    if fraction == 0:
        return mesh
    dx = mesh.length / mesh.n_cells
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-fraction * dx, fraction * dx, size=mesh.n_cells - 1)
    nodes = mesh.nodes.copy()
    nodes[1:-1] += shift
    return Mesh1D(nodes, mesh.boundary)


# ---------------------------------------------------------------------------
# 2D Cartesian


@dataclass(frozen=True, eq=False)
class CartMesh2D:
    """Tensor mesh; element ``e = i * ny + j`` for x-index i, y-index j."""

    xnodes: np.ndarray
    ynodes: np.ndarray
    boundary: tuple = ("periodic", "periodic")

    def __post_init__(self):
        for name in ("xnodes", "ynodes"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.ndim != 1 or len(v) < 2 or np.any(np.diff(v) <= 0):
                raise MeshError(f"{name} must be strictly increasing with >= 1 cell")
            object.__setattr__(self, name, v)
        bnd = self.boundary
        if isinstance(bnd, str):
            bnd = (bnd, bnd)
        object.__setattr__(self, "boundary", tuple(_check_boundary(b) for b in bnd))

    @property
    def nx(self):
        return len(self.xnodes) - 1

    @property
    def ny(self):
        return len(self.ynodes) - 1

    @property
    def n_elements(self):
        return self.nx * self.ny

    @property
    def dx(self):
        return np.diff(self.xnodes)

    @property
    def dy(self):
        return np.diff(self.ynodes)

    @property
    def h(self):
        return max(self.dx.max(), self.dy.max())

    @property
    def area(self):
        return (self.xnodes[-1] - self.xnodes[0]) * (self.ynodes[-1] - self.ynodes[0])

    def element_index(self, i, j):
        return np.asarray(i) * self.ny + np.asarray(j)

    def locate(self, x, y):
        i = np.clip(np.searchsorted(self.xnodes, x, side="right") - 1, 0, self.nx - 1)
        j = np.clip(np.searchsorted(self.ynodes, y, side="right") - 1, 0, self.ny - 1)
        return self.element_index(i, j)


def build_cartesian(a, b, c, d, Nx, Ny, boundary="periodic"):
    if Nx < 1 or Ny < 1:
        raise MeshError(f"need Nx, Ny >= 1, got {Nx}, {Ny}")
    if not (a < b and c < d):
        raise MeshError("degenerate rectangle")
    return CartMesh2D(np.linspace(a, b, Nx + 1), np.linspace(c, d, Ny + 1), boundary)


# ---------------------------------------------------------------------------
# 2D triangles


@dataclass(frozen=True, eq=False)
class TriMesh2D:
    """Triangulation with edge connectivity.

    ``edge_elements[e] = (k0, k1)``; ``k1 == -1`` on a boundary edge.
    ``normals[e]`` / ``tangents[e]`` are unit vectors oriented outward from
    ``k0``. ``elem_edges[k, l]`` is the edge joining local vertices ``l`` and
    ``l + 1``; ``elem_normals[k, l]`` is its outward normal seen from ``k``.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    h: float = None
    periodic_pairs: np.ndarray = field(default=None)
    periodic_shift: np.ndarray = field(default=None)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        tris = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(tris) == 0:
            raise MeshFormatError("mesh has no triangles")
        if tris.min() < 0 or tris.max() >= len(nodes):
            raise MeshFormatError("triangle references a node index out of range")

        p0, p1, p2 = nodes[tris[:, 0]], nodes[tris[:, 1]], nodes[tris[:, 2]]
        signed = 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                        - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0]))
        scale = np.ptp(nodes, axis=0).max() ** 2
        bad = np.abs(signed) <= 1e-14 * scale
        if np.any(bad):
            raise DegenerateElementError(
                f"zero-area triangle(s) at index {np.flatnonzero(bad)[:5].tolist()}")
        tris = tris.copy()
        flip = signed < 0
        tris[flip, 1], tris[flip, 2] = tris[flip, 2].copy(), tris[flip, 1].copy()

        key = np.sort(tris, axis=1)
        _, counts = np.unique(key, axis=0, return_counts=True)
        if np.any(counts > 1):
            raise NonManifoldEdgeError("duplicated triangle in mesh")

        local = np.stack([tris, np.roll(tris, -1, axis=1)], axis=-1)  # (M, 3, 2)
        flat = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse, counts = np.unique(flat, axis=0, return_inverse=True,
                                           return_counts=True)
        inverse = inverse.reshape(-1)
        if np.any(counts > 2):
            e = int(np.flatnonzero(counts > 2)[0])
            raise NonManifoldEdgeError(
                f"edge {edges[e].tolist()} is shared by {counts[e]} triangles")

        n_edges = len(edges)
        edge_elements = -np.ones((n_edges, 2), dtype=np.int64)
        edge_local = -np.ones((n_edges, 2), dtype=np.int64)
        occurrence = np.arange(3 * len(tris))
        order = np.argsort(inverse, kind="stable")
        sorted_edges = inverse[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = sorted_edges[1:] != sorted_edges[:-1]
        for slot, mask in ((0, first), (1, ~first)):
            occ = occurrence[order[mask]]
            edge_elements[sorted_edges[mask], slot] = occ // 3
            edge_local[sorted_edges[mask], slot] = occ % 3

        elem_edges = inverse.reshape(-1, 3)
        a = nodes[local[..., 0]]
        b = nodes[local[..., 1]]
        d = b - a
        length = np.hypot(d[..., 0], d[..., 1])
        elem_tangents = d / length[..., None]
        elem_normals = np.stack([elem_tangents[..., 1], -elem_tangents[..., 0]], axis=-1)

        k0, l0 = edge_elements[:, 0], edge_local[:, 0]
        set_ = lambda name, val: object.__setattr__(self, name, val)
        set_("nodes", nodes)
        set_("triangles", tris)
        set_("areas", np.abs(signed))
        set_("edges", edges)
        set_("edge_elements", edge_elements)
        set_("edge_local", edge_local)
        set_("edge_lengths", length[k0, l0])
        set_("normals", elem_normals[k0, l0])
        set_("tangents", elem_tangents[k0, l0])
        set_("elem_edges", elem_edges)
        set_("elem_normals", elem_normals)
        set_("elem_tangents", elem_tangents)
        set_("centroids", (p0 + p1 + p2) / 3.0)
        if self.h is None:
            set_("h", float(length.max()))
        if self.periodic_pairs is None:
            set_("periodic_pairs", np.zeros((0, 2), dtype=np.int64))
            set_("periodic_shift", np.zeros((0, 2)))
        else:
            set_("periodic_pairs", np.asarray(self.periodic_pairs, dtype=np.int64).reshape(-1, 2))
            shift = self.periodic_shift
            if shift is None:
                shift = self._shifts_for(self.periodic_pairs)
            set_("periodic_shift", np.asarray(shift, dtype=float).reshape(-1, 2))

    @property
    def n_elements(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def boundary_edges(self):
        return np.flatnonzero(self.edge_elements[:, 1] < 0)

    @property
    def interior_edges(self):
        return np.flatnonzero(self.edge_elements[:, 1] >= 0)

    @property
    def edge_midpoints(self):
        return 0.5 * (self.nodes[self.edges[:, 0]] + self.nodes[self.edges[:, 1]])

    @property
    def area(self):
        return self.areas.sum()

    @property
    def jacobians(self):
        """Affine maps x = v0 + J xi from the unit reference triangle."""
        p = self.nodes[self.triangles]
        return np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)

    def _shifts_for(self, pairs):
        mid = self.edge_midpoints
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        return mid[pairs[:, 1]] - mid[pairs[:, 0]]

    def locate(self, x, y):
        """Element containing each point (-1 if outside)."""
        pts = np.column_stack([np.ravel(x), np.ravel(y)])
        p = self.nodes[self.triangles]
        J = self.jacobians
        Jinv = np.linalg.inv(J)
        tree = cKDTree(self.centroids)
        k_near = min(12, self.n_elements)
        _, cand = tree.query(pts, k=k_near)
        cand = np.atleast_2d(cand.reshape(len(pts), -1))
        out = -np.ones(len(pts), dtype=np.int64)
        for c in range(cand.shape[1]):
            todo = out < 0
            if not np.any(todo):
                break
            k = cand[todo, c]
            xi = np.einsum("nij,nj->ni", Jinv[k], pts[todo] - p[k, 0])
            inside = (xi[:, 0] >= -1e-12) & (xi[:, 1] >= -1e-12) & (xi.sum(1) <= 1 + 1e-12)
            idx = np.flatnonzero(todo)[inside]
            out[idx] = k[inside]
        if np.any(out < 0):
            # fall back to a full scan for points whose element is not nearby
            for n in np.flatnonzero(out < 0):
                xi = np.einsum("kij,kj->ki", Jinv, pts[n] - p[:, 0])
                inside = (xi[:, 0] >= -1e-12) & (xi[:, 1] >= -1e-12) & (xi.sum(1) <= 1 + 1e-12)
                hits = np.flatnonzero(inside)
                if len(hits):
                    out[n] = hits[0]
        return out


def build_periodic_pairs(mesh, direction_vectors):
    """Pair boundary edges that match under translation by +/- a direction."""
    dirs = [np.asarray(d, dtype=float) for d in direction_vectors]
    if not dirs:
        return mesh
    bnd = mesh.boundary_edges
    mid = mesh.edge_midpoints[bnd]
    tree = cKDTree(mid)
    partner = -np.ones(len(bnd), dtype=np.int64)
    shift = np.zeros((len(bnd), 2))
    for d in dirs:
        for sgn in (1.0, -1.0):
            dist, idx = tree.query(mid + sgn * d)
            hit = (dist <= PERIODIC_TOL) & (partner < 0)
            partner[hit] = idx[hit]
            shift[hit] = sgn * d
    if np.any(partner < 0):
        n = int(np.sum(partner < 0))
        e = int(bnd[np.flatnonzero(partner < 0)[0]])
        raise PeriodicMatchError(
            f"{n} boundary edge(s) have no periodic partner (first: edge {e})")
    # endpoints must coincide too, not just midpoints
    ea = mesh.nodes[mesh.edges[bnd]]
    eb = mesh.nodes[mesh.edges[bnd[partner]]] - shift[:, None, :]
    same = np.minimum(np.abs(ea - eb).max(axis=(1, 2)),
                      np.abs(ea - eb[:, ::-1]).max(axis=(1, 2)))
    if np.any(same > PERIODIC_TOL):
        raise PeriodicMatchError("periodic edge endpoints do not match under translation")
    keep = np.arange(len(bnd)) < partner
    pairs = np.column_stack([bnd[keep], bnd[partner[keep]]])
    return TriMesh2D(mesh.nodes, mesh.triangles, h=mesh.h,
                     periodic_pairs=pairs, periodic_shift=shift[keep])


def triangulate_rectangle(a, b, c, d, nx, ny, pattern="diagonal", periodic=False):
    """Split an nx x ny grid of rectangles into two triangles each.

    ``pattern='diagonal'`` cuts every rectangle along the same diagonal;
    ``'alternating'`` flips the diagonal in a checkerboard. The characteristic
    length is the larger rectangle side.
    """
    if nx < 1 or ny < 1:
        raise MeshError(f"need nx, ny >= 1, got {nx}, {ny}")
    if pattern not in ("diagonal", "alternating"):
        raise MeshError(f"unknown triangulation pattern {pattern!r}")
    xs = np.linspace(a, b, nx + 1)
    ys = np.linspace(c, d, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    nid = lambda i, j: i * (ny + 1) + j
    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    I, J = I.ravel(), J.ravel()
    n00, n10, n01, n11 = nid(I, J), nid(I + 1, J), nid(I, J + 1), nid(I + 1, J + 1)
    flip = ((I + J) % 2 == 1) if pattern == "alternating" else np.zeros_like(I, dtype=bool)
    t1 = np.where(flip[:, None], np.column_stack([n00, n10, n01]), np.column_stack([n00, n10, n11]))
    t2 = np.where(flip[:, None], np.column_stack([n10, n11, n01]), np.column_stack([n00, n11, n01]))
    tris = np.empty((2 * len(I), 3), dtype=np.int64)
    tris[0::2] = t1
    tris[1::2] = t2
    h = max((b - a) / nx, (d - c) / ny)
    mesh = TriMesh2D(nodes, tris, h=h)
    if periodic:
        mesh = build_periodic_pairs(mesh, [(b - a, 0.0), (0.0, d - c)])
    return mesh


def disk_mesh(n_rings=16, grading=1.6, radius=1.0):
    """Delaunay mesh of a disk, graded towards the centre.

    Ring ``r`` sits at radius ``radius * (r / n_rings) ** grading`` and carries
    about ``2 pi r`` points, so elements shrink near the origin.
    """
    pts = [np.zeros((1, 2))]
    for r in range(1, n_rings + 1):
        rho = radius * (r / n_rings) ** grading
        m = max(6, int(round(2 * np.pi * r)))
        th = 2 * np.pi * (np.arange(m) + 0.5 * (r % 2)) / m
        pts.append(np.column_stack([rho * np.cos(th), rho * np.sin(th)]))
    pts = np.vstack(pts)
    tri = Delaunay(pts)
    return TriMesh2D(pts, tri.simplices)


def graded_square_mesh(n=16, a=0.0, b=1.0, refine=0.5, seed=0):
    """Periodic-compatible Delaunay mesh of a square, refined towards its centre.

    Boundary points are identical on opposite sides so the result can be
    paired periodically. ``refine`` in [0, 1) sets how strongly the
    coordinate lines cluster at the centre.
    """
    s = np.linspace(-1.0, 1.0, n + 1)
    g = s * (1.0 - refine + refine * np.abs(s))  # clusters points near 0
    coords = a + (b - a) * 0.5 * (g + 1.0)
    X, Y = np.meshgrid(coords, coords, indexing="ij")
    rng = np.random.default_rng(seed)
    interior = np.ones_like(X, dtype=bool)
    interior[[0, -1], :] = False
    interior[:, [0, -1]] = False
    spacing = np.diff(coords).min()
    X = X + interior * rng.uniform(-0.2, 0.2, X.shape) * spacing
    Y = Y + interior * rng.uniform(-0.2, 0.2, Y.shape) * spacing
    pts = np.column_stack([X.ravel(), Y.ravel()])
    tri = Delaunay(pts)
    mesh = TriMesh2D(pts, tri.simplices)
    return build_periodic_pairs(mesh, [(b - a, 0.0), (0.0, b - a)])


# ---------------------------------------------------------------------------
# file I/O


def _read_native(lines):
    it = iter(lines)

    def header(name):
        try:
            parts = next(it).split()
        except StopIteration:
            raise MeshFormatError(f"missing '{name}' section") from None
        if len(parts) != 2 or parts[0] != name:
            raise MeshFormatError(f"expected '{name} <count>', got {' '.join(parts)!r}")
        try:
            return int(parts[1])
        except ValueError:
            raise MeshFormatError(f"bad count in '{name}' header") from None

    def rows(n, width, cast, what):
        out = []
        for _ in range(n):
            try:
                parts = next(it).split()
            except StopIteration:
                raise MeshFormatError(f"file ended inside {what} block") from None
            if len(parts) != width:
                raise MeshFormatError(f"{what} line needs {width} entries, got {len(parts)}")
            try:
                out.append([cast(p) for p in parts])
            except ValueError:
                raise MeshFormatError(f"non-numeric entry in {what} block") from None
        return out

    nodes = rows(header("nodes"), 2, float, "node")
    tris = rows(header("triangles"), 3, int, "triangle")
    pairs = None
    rest = [ln for ln in it if ln.strip()]
    if rest:
        it = iter(rest)
        pairs = rows(header("periodic"), 2, int, "periodic")
    return np.array(nodes), np.array(tris, dtype=np.int64), pairs


def _read_gmsh(lines):
    nodes, tris, ids = None, [], {}
    i = 0
    try:
        while i < len(lines):
            tag = lines[i].strip()
            if tag == "$MeshFormat":
                version = lines[i + 1].split()[0]
                if not version.startswith("2"):
                    raise MeshFormatError(f"only MSH 2.2 ASCII is supported, got {version}")
            elif tag == "$Nodes":
                n = int(lines[i + 1])
                nodes = np.empty((n, 2))
                for r in range(n):
                    parts = lines[i + 2 + r].split()
                    ids[int(parts[0])] = r
                    nodes[r] = float(parts[1]), float(parts[2])
                i += n + 2
                continue
            elif tag == "$Elements":
                n = int(lines[i + 1])
                for r in range(n):
                    parts = [int(p) for p in lines[i + 2 + r].split()]
                    if parts[1] == 2:
                        ntags = parts[2]
                        tris.append([ids[v] for v in parts[3 + ntags:6 + ntags]])
                i += n + 2
                continue
            i += 1
    except (IndexError, ValueError, KeyError) as exc:
        raise MeshFormatError(f"malformed Gmsh file: {exc}") from None
    if nodes is None or not tris:
        raise MeshFormatError("Gmsh file lacks $Nodes or triangle elements")
    return nodes, np.array(tris, dtype=np.int64), None


def load_tri_mesh(path):
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise MeshFormatError(f"{path}: empty mesh file")
    if lines[0].startswith("$"):
        nodes, tris, pairs = _read_gmsh(lines)
    else:
        nodes, tris, pairs = _read_native(lines)
    mesh = TriMesh2D(nodes, tris)
    if pairs:
        pairs = np.array(pairs, dtype=np.int64)
        if pairs.min() < 0 or pairs.max() >= mesh.n_edges:
            raise MeshFormatError("periodic pair references an unknown edge")
        mesh = TriMesh2D(mesh.nodes, mesh.triangles, h=mesh.h, periodic_pairs=pairs)
    return mesh


def save_tri_mesh(mesh, path):
    with open(path, "w") as fh:
        fh.write(f"nodes {len(mesh.nodes)}\n")
        for x, y in mesh.nodes:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        fh.write(f"triangles {mesh.n_elements}\n")
        for t in mesh.triangles:
            fh.write(f"{t[0]} {t[1]} {t[2]}\n")
        if len(mesh.periodic_pairs):
            fh.write(f"periodic {len(mesh.periodic_pairs)}\n")
            for ea, eb in mesh.periodic_pairs:
                fh.write(f"{ea} {eb}\n")
