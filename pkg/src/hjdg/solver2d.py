"""Semi-discrete DG operators for phi_t + H(grad phi, x, y) = 0 in 2D.

Cartesian and triangular meshes share one face sweep. For every face the
traces of both neighbours are taken at the same Gauss points, the Roe data is
computed once from the ``left`` element's point of view (normal n), and the
two contributions are

    left  (normal  n):  -min(H~, 0) [phi] + C l_L visc [grad phi . n]
    right (normal -n):  -max(H~, 0) [phi] + C l_R visc [grad phi . n]

with [u] = u_right - u_left and l = element area / edge length (this is
dx for x-faces and dy for y-faces of a rectangle). The right-element form is
the left-element form rewritten with the reversed normal: H~ changes sign
while [phi] and [grad phi . n] as written above, visc and the tangential
average are unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import rectangle_rule, triangle_rule
from .field import InterfaceTrace, element_maps, face_table
from .hamiltonian import DirectionalHamiltonian
from .mesh import CartMesh2D, TriMesh2D
from .riemann import roe_data

BOUNDARY_RULES = ("outflow",)


@dataclass
class _FaceSide:
    elems: np.ndarray
    groups: list
    an: np.ndarray      # J^-1 n: reference-gradient weights giving grad . n
    at: np.ndarray      # J^-1 t


def _scatter(out, elems, values):
    """out[elems[f]] += values[f] for every dof, tolerating repeated indices."""
    E = out.shape[0]
    for n in range(out.shape[1]):
        out[:, n] += np.bincount(elems, weights=values[:, n], minlength=E)


class Scheme2D:
    """Precomputed volume and face tables for one mesh/basis/model/params."""

    def __init__(self, mesh, basis, model, params):
        if model.dim != 2:
            raise ValueError(f"{model.name} is not a 2D Hamiltonian")
        if isinstance(mesh, CartMesh2D):
            if basis.kind != "rectangle":
                raise ValueError("Cartesian meshes need the rectangle basis")
            degree = params.vol_degree
            rule = rectangle_rule(max(params.k + 1, degree // 2 + 1))
        elif isinstance(mesh, TriMesh2D):
            if basis.kind != "triangle":
                raise ValueError("triangular meshes need the triangle basis")
            rule = triangle_rule(params.vol_degree)
        else:
            raise TypeError(f"unsupported mesh type {type(mesh).__name__}")
        self.mesh, self.basis, self.model, self.params = mesh, basis, model, params
        maps = element_maps(mesh)
        E = len(maps.det)
        self.det = maps.det
        self.weights = rule.weights
        self.V, G = basis.tabulate(rule.points)
        self.Gx, self.Gy = G[..., 0], G[..., 1]
        self.jinv = maps.jac_inv
        xq = maps.to_physical(np.arange(E)[:, None], rule.points[None, :, :])
        self.xq, self.yq = xq[..., 0], xq[..., 1]

        faces = face_table(mesh, params.face_points)
        self.faces = faces
        inner = np.flatnonzero(faces.right >= 0)
        pts = faces.points[inner]
        pts_r = pts + faces.shift[inner][:, None, :]
        # order faces so each side's reference-point groups are contiguous blocks
        gl, ref_l = self._ref_groups(maps, faces.left[inner], pts)
        gr, ref_r = self._ref_groups(maps, faces.right[inner], pts_r)
        order = np.lexsort((gr, gl))
        inner, pts, gl, gr = inner[order], pts[order], gl[order], gr[order]
        ref_l, ref_r = ref_l[order], ref_r[order]
        self.f_left = faces.left[inner]
        self.f_right = faces.right[inner]
        normal = faces.normal[inner]
        tangent = faces.tangent[inner]
        self.normal = normal
        self.tangent = tangent
        self.fx, self.fy = pts[..., 0], pts[..., 1]
        # quadrature weight times half edge length, per face point
        self.fw = faces.weights[None, :] * (0.5 * faces.length[inner])[:, None]
        area = np.abs(maps.det) * (0.5 if basis.kind == "triangle" else 4.0)
        self.len_left = area[self.f_left] / faces.length[inner]
        self.len_right = area[self.f_right] / faces.length[inner]
        blocks = np.flatnonzero(np.diff(gl * (gr.max(initial=0) + 1) + gr)) + 1
        bounds = list(zip(np.r_[0, blocks], np.r_[blocks, len(inner)])) if len(inner) else []
        self.left_side = self._face_side(maps, self.f_left, ref_l, bounds, normal, tangent)
        self.right_side = self._face_side(maps, self.f_right, ref_r, bounds, normal, tangent)
        self.dirham = DirectionalHamiltonian(model, normal[:, None, :], tangent[:, None, :])
        perim = np.zeros(E)
        np.add.at(perim, faces.left, faces.length)
        np.add.at(perim, faces.right[inner], faces.length[inner])
        if isinstance(mesh, CartMesh2D):
            self.dx_min = float(np.min(mesh.dx))
            self.dy_min = float(np.min(mesh.dy))
        else:
            # inscribed-circle diameter of each triangle
            self.tri_length = float(np.min(4.0 * mesh.areas / perim))

    @staticmethod
    def _ref_groups(maps, elems, pts):
        F, Q = pts.shape[:2]
        if F == 0:
            return np.zeros(0, dtype=np.int64), np.zeros((0, Q, 2))
        ref = maps.to_reference(np.repeat(elems, Q), pts.reshape(-1, 2)).reshape(F, Q, 2)
        _, group = np.unique(np.round(ref.reshape(F, -1), 9), axis=0, return_inverse=True)
        return group.reshape(-1), ref

    def _face_side(self, maps, elems, ref, bounds, normal, tangent):
        """Basis tables for one side of every face.

        Faces come in contiguous blocks sharing their reference-coordinate
        points (one block per pair of local edges), so values and reference
        gradients are shared matrices and only Jacobian factors vary per face.
        """
        jinv = maps.jac_inv[elems]
        side = _FaceSide(elems=elems, groups=[],
                         an=np.einsum("fba,fa->fb", jinv, normal),
                         at=np.einsum("fba,fa->fb", jinv, tangent))
        for lo, hi in bounds:
            vals, grads = self.basis.tabulate(ref[lo])
            side.groups.append((slice(lo, hi), elems[lo:hi], vals, grads[..., 0], grads[..., 1]))
        return side

    def _side_traces(self, side, coeffs):
        F = len(side.elems)
        Q = self.fw.shape[1]
        phi = np.empty((F, Q))
        g0 = np.empty((F, Q))
        g1 = np.empty((F, Q))
        for idx, el, vals, d0, d1 in side.groups:
            c = coeffs[el]
            phi[idx] = c @ vals.T
            g0[idx] = c @ d0.T
            g1[idx] = c @ d1.T
        pn = side.an[:, 0, None] * g0 + side.an[:, 1, None] * g1
        pt = side.at[:, 0, None] * g0 + side.at[:, 1, None] * g1
        return phi, pn, pt

    def _side_scatter(self, out, side, rate):
        for idx, el, vals, _, _ in side.groups:
            _scatter(out, el, rate[idx] @ vals)

    # ------------------------------------------------------------------
    def gradients(self, coeffs):
        """(phi_x, phi_y) at the volume quadrature points, each (E, Q)."""
        a = coeffs @ self.Gx.T
        b = coeffs @ self.Gy.T
        J = self.jinv
        px = J[:, 0, 0, None] * a + J[:, 1, 0, None] * b
        py = J[:, 0, 1, None] * a + J[:, 1, 1, None] * b
        return px, py

    def face_traces(self, coeffs):
        phi_l, pn_l, pt_l = self._side_traces(self.left_side, coeffs)
        phi_r, pn_r, pt_r = self._side_traces(self.right_side, coeffs)
        return phi_l, phi_r, pn_l, pn_r, 0.5 * (pt_l + pt_r)

    def face_roe(self, coeffs):
        phi_l, phi_r, pn_l, pn_r, pt_avg = self.face_traces(coeffs)
        xy = (self.fx, self.fy)
        roe = roe_data(self.dirham, pn_l, pn_r, pt_avg, xy, xy)
        return roe, phi_r - phi_l, pn_r - pn_l

    def rhs(self, coeffs):
        C = self.params.C
        px, py = self.gradients(coeffs)
        Hq = self.model.H(px, py, self.xq, self.yq)
        out = -(Hq * self.weights) @ self.V

        roe, jump, pjump = self.face_roe(coeffs)
        speed = roe.roe_speed
        rate_l = -np.minimum(speed, 0.0) * jump
        rate_r = -np.maximum(speed, 0.0) * jump
        if C > 0:
            pen = C * roe.visc * pjump
            rate_l = rate_l + self.len_left[:, None] * pen
            rate_r = rate_r + self.len_right[:, None] * pen
        face = np.zeros_like(out)
        self._side_scatter(face, self.left_side, rate_l * self.fw)
        self._side_scatter(face, self.right_side, rate_r * self.fw)
        return out + face / self.det[:, None]

    def max_speeds(self, coeffs):
        px, py = self.gradients(coeffs)
        h1, h2 = self.model.gradient(px, py, self.xq, self.yq)
        return float(np.max(np.abs(h1))), float(np.max(np.abs(h2)))

    __call__ = rhs


_SCHEMES = {}


def scheme_2d(mesh, basis, model, params):
    key = (id(mesh), basis.kind, basis.degree, model.name, params)
    cached = _SCHEMES.get(key)
    if cached is None or cached.mesh is not mesh or cached.model is not model:
        cached = Scheme2D(mesh, basis, model, params)
        if len(_SCHEMES) > 16:
            _SCHEMES.clear()
        _SCHEMES[key] = cached
    return cached


def assemble_rhs_cart(field, model, params):
    if not isinstance(field.mesh, CartMesh2D):
        raise TypeError("assemble_rhs_cart needs a CartMesh2D field")
    return scheme_2d(field.mesh, field.basis, model, params).rhs(field.coeffs)


def assemble_rhs_tri(field, model, params):
    if not isinstance(field.mesh, TriMesh2D):
        raise TypeError("assemble_rhs_tri needs a TriMesh2D field")
    return scheme_2d(field.mesh, field.basis, model, params).rhs(field.coeffs)


def boundary_rule_tri(field, edge, rule="outflow", face_point=0.0):
    """Trace on a physical boundary edge of a triangular mesh.

    Only the outflow rule exists: the outside trace copies the inside one, so
    the edge adds nothing to the operator. Periodic-paired edges are interior
    edges and are rejected here.
    """
    if rule not in BOUNDARY_RULES:
        raise NotImplementedError(f"boundary rule {rule!r} is not supported; use 'outflow'")
    mesh = field.mesh
    if mesh.edge_elements[edge, 1] >= 0:
        raise ValueError(f"edge {edge} is interior")
    if len(mesh.periodic_pairs) and np.any(mesh.periodic_pairs == edge):
        raise ValueError(f"edge {edge} is periodic-paired and behaves as interior")
    elem = mesh.edge_elements[edge, 0]
    a, b = mesh.nodes[mesh.edges[edge, 0]], mesh.nodes[mesh.edges[edge, 1]]
    x = 0.5 * (a + b) + 0.5 * float(face_point) * (b - a)
    v, g = field.evaluate_reference(np.array([elem]), field.maps.to_reference(elem, x)[None])
    n, t = mesh.normals[edge], mesh.tangents[edge]
    return InterfaceTrace(x, float(v[0]), float(v[0]), g[0], g[0], n, t)
