"""Piecewise-polynomial fields: projection, evaluation and interface traces.

A :class:`DGField` stores one coefficient row per element in the orthonormal
basis of :mod:`hjdg.basis`. Element geometry is an affine map from the
reference element; 2D interfaces are collected in a :class:`FaceTable` whose
quadrature points are fixed per face, so both adjacent elements are evaluated
at the same physical points.
"""

from __future__ import annotations

import csv
import weakref
from dataclasses import dataclass, field as dc_field

import numpy as np

from .basis import gauss_rule, make_basis, volume_rule
from .mesh import CartMesh2D, Mesh1D, TriMesh2D

_MAPS = weakref.WeakKeyDictionary()
_FACES = weakref.WeakKeyDictionary()


def element_kind(mesh):
    if isinstance(mesh, Mesh1D):
        return "interval"
    if isinstance(mesh, CartMesh2D):
        return "rectangle"
    if isinstance(mesh, TriMesh2D):
        return "triangle"
    raise TypeError(f"unsupported mesh type {type(mesh).__name__}")


def n_elements(mesh):
    return mesh.n_cells if isinstance(mesh, Mesh1D) else mesh.n_elements


def domain_measure(mesh):
    return mesh.length if isinstance(mesh, Mesh1D) else mesh.area


class ElementMaps:
    """Affine maps x = origin + J xi for every element.

    1D: ``origin`` and ``jac`` have shape (E,). 2D: (E, 2) and (E, 2, 2).
    """

    def __init__(self, mesh):
        self.kind = element_kind(mesh)
        if self.kind == "interval":
            self.origin = mesh.centers
            self.jac = 0.5 * mesh.widths
            self.jac_inv = 1.0 / self.jac
            self.det = self.jac.copy()
        elif self.kind == "rectangle":
            cx = 0.5 * (mesh.xnodes[1:] + mesh.xnodes[:-1])
            cy = 0.5 * (mesh.ynodes[1:] + mesh.ynodes[:-1])
            I, J = np.meshgrid(np.arange(mesh.nx), np.arange(mesh.ny), indexing="ij")
            I, J = I.ravel(), J.ravel()
            self.origin = np.column_stack([cx[I], cy[J]])
            jac = np.zeros((len(I), 2, 2))
            jac[:, 0, 0] = 0.5 * mesh.dx[I]
            jac[:, 1, 1] = 0.5 * mesh.dy[J]
            self.jac = jac
            self.jac_inv = np.zeros_like(jac)
            self.jac_inv[:, 0, 0] = 1.0 / jac[:, 0, 0]
            self.jac_inv[:, 1, 1] = 1.0 / jac[:, 1, 1]
            self.det = jac[:, 0, 0] * jac[:, 1, 1]
        else:
            self.origin = mesh.nodes[mesh.triangles[:, 0]]
            self.jac = mesh.jacobians
            self.jac_inv = np.linalg.inv(self.jac)
            self.det = np.abs(np.linalg.det(self.jac))

    def to_physical(self, elements, xi):
        if self.kind == "interval":
            return self.origin[elements] + self.jac[elements] * xi
        return self.origin[elements] + np.einsum("...ij,...j->...i", self.jac[elements], xi)

    def to_reference(self, elements, x):
        if self.kind == "interval":
            return (x - self.origin[elements]) * self.jac_inv[elements]
        return np.einsum("...ij,...j->...i", self.jac_inv[elements], x - self.origin[elements])

    def physical_gradients(self, elements, ref_grads):
        """Chain rule: reference gradients (..., nd[, 2]) -> physical ones."""
        if self.kind == "interval":
            return ref_grads * self.jac_inv[elements][..., None]
        return np.einsum("...nb,...ba->...na", ref_grads, self.jac_inv[elements])


def element_maps(mesh):
    maps = _MAPS.get(mesh)
    if maps is None:
        maps = _MAPS[mesh] = ElementMaps(mesh)
    return maps


# ---------------------------------------------------------------------------
# faces


@dataclass
class FaceTable:
    """2D interfaces with one set of quadrature points per face.

    ``left`` is the element whose outward normal is ``normal``; ``right`` is
    the neighbour (-1 on an outflow boundary). The neighbour sees the face at
    ``points + shift`` (nonzero only across periodic pairs).
    """

    left: np.ndarray
    right: np.ndarray
    normal: np.ndarray
    tangent: np.ndarray
    length: np.ndarray
    start: np.ndarray
    end: np.ndarray
    shift: np.ndarray
    tag: np.ndarray
    n_points: int
    s: np.ndarray = dc_field(init=False)
    weights: np.ndarray = dc_field(init=False)
    points: np.ndarray = dc_field(init=False)

    def __post_init__(self):
        rule = gauss_rule(self.n_points)
        self.s = rule.points
        self.weights = rule.weights
        mid = 0.5 * (self.start + self.end)
        half = 0.5 * (self.end - self.start)
        self.points = mid[:, None, :] + self.s[None, :, None] * half[:, None, :]

    @property
    def n_faces(self):
        return len(self.left)

    @property
    def boundary(self):
        return self.right < 0


def _cart_faces(mesh, n_points):
    nx, ny = mesh.nx, mesh.ny
    xs, ys = mesh.xnodes, mesh.ynodes
    rows = []

    def add(left, right, n, t, start, end, shift, tag):
        rows.append((left, right, np.broadcast_to(n, start.shape), np.broadcast_to(t, start.shape),
                     start, end, np.broadcast_to(shift, start.shape), tag))

    jj = np.arange(ny)
    ii = np.arange(nx)
    # x-faces, interior
    I, J = np.meshgrid(np.arange(nx - 1), jj, indexing="ij")
    I, J = I.ravel(), J.ravel()
    add(mesh.element_index(I, J), mesh.element_index(I + 1, J), (1.0, 0.0), (0.0, 1.0),
        np.column_stack([xs[I + 1], ys[J]]), np.column_stack([xs[I + 1], ys[J + 1]]), (0.0, 0.0), "x")
    xr = np.column_stack([np.full(ny, xs[-1]), ys[jj]])
    xr_end = np.column_stack([np.full(ny, xs[-1]), ys[jj + 1]])
    if mesh.boundary[0] == "periodic":
        add(mesh.element_index(nx - 1, jj), mesh.element_index(0, jj), (1.0, 0.0), (0.0, 1.0),
            xr, xr_end, (xs[0] - xs[-1], 0.0), "x")
    else:
        add(mesh.element_index(nx - 1, jj), -np.ones(ny, dtype=np.int64), (1.0, 0.0), (0.0, 1.0),
            xr, xr_end, (0.0, 0.0), "x")
        add(mesh.element_index(0, jj), -np.ones(ny, dtype=np.int64), (-1.0, 0.0), (0.0, -1.0),
            np.column_stack([np.full(ny, xs[0]), ys[jj + 1]]),
            np.column_stack([np.full(ny, xs[0]), ys[jj]]), (0.0, 0.0), "x")
    # y-faces, interior
    I, J = np.meshgrid(ii, np.arange(ny - 1), indexing="ij")
    I, J = I.ravel(), J.ravel()
    add(mesh.element_index(I, J), mesh.element_index(I, J + 1), (0.0, 1.0), (-1.0, 0.0),
        np.column_stack([xs[I + 1], ys[J + 1]]), np.column_stack([xs[I], ys[J + 1]]), (0.0, 0.0), "y")
    yt = np.column_stack([xs[ii + 1], np.full(nx, ys[-1])])
    yt_end = np.column_stack([xs[ii], np.full(nx, ys[-1])])
    if mesh.boundary[1] == "periodic":
        add(mesh.element_index(ii, ny - 1), mesh.element_index(ii, 0), (0.0, 1.0), (-1.0, 0.0),
            yt, yt_end, (0.0, ys[0] - ys[-1]), "y")
    else:
        add(mesh.element_index(ii, ny - 1), -np.ones(nx, dtype=np.int64), (0.0, 1.0), (-1.0, 0.0),
            yt, yt_end, (0.0, 0.0), "y")
        add(mesh.element_index(ii, 0), -np.ones(nx, dtype=np.int64), (0.0, -1.0), (1.0, 0.0),
            np.column_stack([xs[ii], np.full(nx, ys[0])]),
            np.column_stack([xs[ii + 1], np.full(nx, ys[0])]), (0.0, 0.0), "y")

    cols = list(zip(*rows))
    left = np.concatenate(cols[0]).astype(np.int64)
    right = np.concatenate(cols[1]).astype(np.int64)
    normal = np.concatenate(cols[2]).astype(float)
    tangent = np.concatenate(cols[3]).astype(float)
    start = np.concatenate(cols[4]).astype(float)
    end = np.concatenate(cols[5]).astype(float)
    shift = np.concatenate(cols[6]).astype(float)
    tag = np.concatenate([np.full(len(r[0]), r[7]) for r in rows])
    length = np.linalg.norm(end - start, axis=1)
    return FaceTable(left, right, normal, tangent, length, start, end, shift, tag, n_points)


def _tri_faces(mesh, n_points):
    k0 = mesh.edge_elements[:, 0]
    k1 = mesh.edge_elements[:, 1].copy()
    l0 = mesh.edge_local[:, 0]
    shift = np.zeros((mesh.n_edges, 2))
    keep = np.ones(mesh.n_edges, dtype=bool)
    if len(mesh.periodic_pairs):
        ea, eb = mesh.periodic_pairs[:, 0], mesh.periodic_pairs[:, 1]
        k1[ea] = mesh.edge_elements[eb, 0]
        shift[ea] = mesh.periodic_shift
        keep[eb] = False
    tri = mesh.triangles
    start = mesh.nodes[tri[k0, l0]]
    end = mesh.nodes[tri[k0, (l0 + 1) % 3]]
    table = FaceTable(k0[keep], k1[keep], mesh.normals[keep], mesh.tangents[keep],
                      mesh.edge_lengths[keep], start[keep], end[keep], shift[keep],
                      np.full(int(keep.sum()), "generic"), n_points)
    table.edge_index = np.flatnonzero(keep)
    return table


def face_table(mesh, n_points):
    cache = _FACES.setdefault(mesh, {})
    if n_points not in cache:
        if isinstance(mesh, CartMesh2D):
            cache[n_points] = _cart_faces(mesh, n_points)
        elif isinstance(mesh, TriMesh2D):
            cache[n_points] = _tri_faces(mesh, n_points)
        else:
            raise TypeError("face tables are built for 2D meshes only")
    return cache[n_points]


# ---------------------------------------------------------------------------
# fields


@dataclass
class DGField:
    mesh: object
    basis: object
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        expected = (n_elements(self.mesh), self.basis.n_dofs)
        if self.coeffs.shape != expected:
            raise ValueError(f"coefficient array has shape {self.coeffs.shape}, expected {expected}")

    @property
    def maps(self):
        return element_maps(self.mesh)

    def copy(self, coeffs=None, time=None):
        return DGField(self.mesh, self.basis,
                       self.coeffs.copy() if coeffs is None else coeffs,
                       self.time if time is None else time)

    def means(self):
        """Element averages."""
        return self.coeffs[:, 0] * self.basis.mean_mode_value()

    def evaluate_reference(self, elements, xi):
        """Values and physical gradients at reference points of given elements."""
        vals, grads = self.basis.tabulate(xi)
        c = self.coeffs[elements]
        value = np.einsum("...n,...n->...", vals.reshape(c.shape), c)
        if self.basis.dim == 1:
            g = self.maps.physical_gradients(elements, grads.reshape(c.shape))
            return value, np.einsum("...n,...n->...", g, c)
        g = self.maps.physical_gradients(elements, grads.reshape(c.shape + (2,)))
        return value, np.einsum("...nd,...n->...d", g, c)

    def locate(self, points):
        pts = np.asarray(points, dtype=float)
        if self.basis.dim == 1:
            return self.mesh.locate(pts)
        pts = pts.reshape(-1, 2)
        return self.mesh.locate(pts[:, 0], pts[:, 1])

    def sample(self, points):
        """Values and gradients at arbitrary physical points."""
        pts = np.asarray(points, dtype=float)
        if self.basis.dim == 1:
            pts = pts.reshape(-1)
        else:
            pts = pts.reshape(-1, 2)
        elems = self.locate(pts)
        if np.any(elems < 0):
            raise ValueError("sample point outside the mesh")
        xi = self.maps.to_reference(elems, pts)
        return self.evaluate_reference(elems, xi)


def zeros(mesh, basis):
    return DGField(mesh, basis, np.zeros((n_elements(mesh), basis.n_dofs)))


def basis_for(mesh, k):
    return make_basis(element_kind(mesh), k)


def quadrature_points(mesh, degree):
    """Physical points (E, Q[, 2]), reference rule and |det J| for a volume rule."""
    kind = element_kind(mesh)
    rule = volume_rule(kind, degree)
    maps = element_maps(mesh)
    E = n_elements(mesh)
    elems = np.arange(E)
    if kind == "interval":
        pts = maps.to_physical(elems[:, None], rule.points[None, :])
    else:
        pts = maps.to_physical(elems[:, None], rule.points[None, :, :])
    return pts, rule, maps.det


def _call(f, pts):
    if pts.ndim == 2:  # 1D: (E, Q)
        return np.broadcast_to(f(pts), pts.shape)
    return np.broadcast_to(f(pts[..., 0], pts[..., 1]), pts.shape[:-1])


def project(mesh, basis, f, extra_degree=2):
    """Element-wise L2 projection of f (called as f(x) or f(x, y))."""
    pts, rule, _ = quadrature_points(mesh, 2 * basis.degree + extra_degree)
    vals, _ = basis.tabulate(rule.points)
    fq = _call(f, pts)
    coeffs = np.einsum("eq,q,qn->en", fq, rule.weights, vals)
    return DGField(mesh, basis, coeffs)


def evaluate(field, element, point):
    """(value, gradient) of the field restricted to ``element`` at a physical point."""
    E = n_elements(field.mesh)
    if not 0 <= element < E:
        raise IndexError(f"element {element} out of range [0, {E})")
    pt = np.asarray(point, dtype=float)
    xi = field.maps.to_reference(element, pt)
    v, g = field.evaluate_reference(np.array([element]), xi.reshape((1,) + xi.shape))
    return float(v[0]), (float(g[0]) if field.basis.dim == 1 else g[0])


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class InterfaceTrace:
    """One-sided data at a face point; minus is the active (inside) element."""

    location: np.ndarray
    value_minus: float
    value_plus: float
    grad_minus: np.ndarray
    grad_plus: np.ndarray
    normal: np.ndarray
    tangent: np.ndarray

    @property
    def jump(self):
        return self.value_plus - self.value_minus

    @property
    def average(self):
        return 0.5 * (self.value_plus + self.value_minus)

    @property
    def pn_minus(self):
        return float(np.dot(self.grad_minus, self.normal))

    @property
    def pn_plus(self):
        return float(np.dot(self.grad_plus, self.normal))

    @property
    def normal_jump(self):
        return self.pn_plus - self.pn_minus

    @property
    def tangential_average(self):
        return 0.5 * float(np.dot(self.grad_minus, self.tangent) + np.dot(self.grad_plus, self.tangent))


def _trace_1d(field, face, active=None):
    mesh = field.mesh
    N = mesh.n_cells
    if not 0 <= face <= N:
        raise IndexError(f"interface {face} out of range [0, {N}]")
    left, right = face - 1, face
    if mesh.boundary == "periodic":
        left, right = left % N, right % N
    else:
        left = left if left >= 0 else right
        right = right if right < N else left
    v_l, g_l = field.evaluate_reference(np.array([left]), np.array([1.0]))
    v_r, g_r = field.evaluate_reference(np.array([right]), np.array([-1.0]))
    if left == right and mesh.boundary != "periodic":
        v_l, g_l = v_r, g_r = (v_l, g_l) if face == N else (v_r, g_r)
    x = mesh.nodes[face]
    # 1D convention: minus = left limit, plus = right limit, normal +1
    return InterfaceTrace(np.array([x]), float(v_l[0]), float(v_r[0]),
                          np.array([g_l[0]]), np.array([g_r[0]]),
                          np.array([1.0]), np.array([0.0]))


def trace(field, face, face_point=0.0, flip=False):
    """Traces at an interface.

    1D: ``face`` is the interface index 0..N and minus/plus are left/right
    limits. 2D: ``face`` indexes :func:`face_table` (k+1 Gauss points) and
    ``face_point`` is the edge parameter in [-1, 1]; minus is the face's
    ``left`` element, or its neighbour when ``flip`` is set.
    """
    if field.basis.dim == 1:
        return _trace_1d(field, face)
    faces = face_table(field.mesh, field.basis.degree + 1)
    if not 0 <= face < faces.n_faces:
        raise IndexError(f"face {face} out of range")
    s = float(face_point)
    x = 0.5 * (faces.start[face] + faces.end[face]) + 0.5 * s * (faces.end[face] - faces.start[face])
    kl, kr = faces.left[face], faces.right[face]
    v_l, g_l = field.evaluate_reference(np.array([kl]), field.maps.to_reference(kl, x)[None])
    if kr < 0:
        v_r, g_r = v_l, g_l
    else:
        xr = x + faces.shift[face]
        v_r, g_r = field.evaluate_reference(np.array([kr]), field.maps.to_reference(kr, xr)[None])
    n, t = faces.normal[face], faces.tangent[face]
    if flip:
        return InterfaceTrace(x, float(v_r[0]), float(v_l[0]), g_r[0], g_l[0], -n, -t)
    return InterfaceTrace(x, float(v_l[0]), float(v_r[0]), g_l[0], g_r[0], n, t)


# ---------------------------------------------------------------------------
# CSV output


def write_coefficients_csv(field, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["element", "dof", "coefficient"])
        for e, row in enumerate(field.coeffs):
            for n, c in enumerate(row):
                w.writerow([e, n, repr(float(c))])


def sample_points(mesh, resolution):
    """Per-element sampling lattice with ``resolution`` points per direction."""
    r = max(1, int(resolution))
    kind = element_kind(mesh)
    maps = element_maps(mesh)
    E = n_elements(mesh)
    s = (np.arange(r) + 0.5) / r * 2.0 - 1.0
    if kind == "interval":
        ref = s
    elif kind == "rectangle":
        a, b = np.meshgrid(s, s, indexing="ij")
        ref = np.column_stack([a.ravel(), b.ravel()])
    else:
        ref = np.array([((i + 1.0 / 3.0) / r, (j + 1.0 / 3.0) / r)
                        for i in range(r) for j in range(r - i)])
    elems = np.repeat(np.arange(E), len(ref))
    tiled = np.tile(ref, (E, 1)) if ref.ndim == 2 else np.tile(ref, E)
    return elems, tiled, maps.to_physical(elems, tiled)


def write_samples_csv(field, path, resolution=4):
    elems, ref, pts = sample_points(field.mesh, resolution)
    vals, _ = field.evaluate_reference(elems, ref)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if field.basis.dim == 1:
            w.writerow(["x", "phi"])
            for x, v in zip(pts, vals):
                w.writerow([repr(float(x)), repr(float(v))])
        else:
            w.writerow(["x", "y", "phi"])
            for (x, y), v in zip(pts, vals):
                w.writerow([repr(float(x)), repr(float(y)), repr(float(v))])


def read_samples_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: no samples")
    header = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return header, data
