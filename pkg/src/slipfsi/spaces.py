"""Finite element spaces on the structured mesh.

Velocity: continuous biquadratic (Q2) vector field on the refined
(2nx+1)x(2ny+1) lattice, DOFs interleaved (node, component).
Pressure: continuous bilinear (Q1) on the mesh nodes.
Interface: Q2 edge traces paired with the Hermite grid and a piecewise
linear multiplier space, all sharing one 4-point Gauss rule per element.

Rigid boundary conditions are realized as per-component strong zeros:
tangential on dynamic-pressure faces, both on no-slip faces, normal on
slip and symmetry faces.  All faces are axis-aligned, so each condition
pins exactly one Cartesian component.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import FaceTag
from .quadshape import (
    gauss_quad_2d,
    gauss_unit,
    hermite_shape,
    q1_dshape,
    q1_shape,
    q2_dshape,
    q2_shape,
    quad1d_shape,
)

_SIDE_NORMALS = {"bottom": (0.0, -1.0), "top": (0.0, 1.0), "left": (-1.0, 0.0), "right": (1.0, 0.0)}


@dataclass
class BoundaryFaceEdges:
    """Q2 edge elements lying on one polygon face."""

    face_index: int
    tag: FaceTag
    side: str
    nodes: np.ndarray  # (nedge, 3) Q2 node ids along the edge
    lengths: np.ndarray  # (nedge,)
    normal: tuple


class FluidSpaces:
    def __init__(self, mesh, grid, nq_volume=3, nq_interface=4):
        self.mesh = mesh
        self.grid = grid
        nx, ny = mesh.nx, mesh.ny
        self.nx, self.ny = nx, ny

        # refined lattice coordinates (vertices + midpoints)
        self.x2 = self._refine(mesh.xs)
        self.y2 = self._refine(mesh.ys)
        self.n_vnodes = (2 * nx + 1) * (2 * ny + 1)
        self.n_udof = 2 * self.n_vnodes
        xx, yy = np.meshgrid(self.x2, self.y2, indexing="xy")
        self.vnode_xy = np.column_stack([xx.ravel(), yy.ravel()])

        cx = np.arange(nx * ny) % nx
        cy = np.arange(nx * ny) // nx
        conn = np.empty((nx * ny, 9), dtype=int)
        for b in range(3):
            for a in range(3):
                conn[:, 3 * b + a] = (2 * cy + b) * (2 * nx + 1) + (2 * cx + a)
        self.conn_q2 = conn
        self.elem_udofs = np.empty((nx * ny, 18), dtype=int)
        self.elem_udofs[:, 0::2] = 2 * conn
        self.elem_udofs[:, 1::2] = 2 * conn + 1

        self.conn_p = mesh.cells
        self.n_pdof = len(mesh.nodes)

        # volume quadrature tabulation
        self.qpts, self.qwts = gauss_quad_2d(nq_volume)
        self.nq = len(self.qwts)
        self.N2 = q2_shape(self.qpts)
        self.dN2 = q2_dshape(self.qpts)
        self.N1 = q1_shape(self.qpts)
        self.dN1 = q1_dshape(self.qpts)
        sizes = mesh.cell_sizes()
        self.cell_sizes = sizes
        self.scale = 2.0 / sizes
        self.warea = self.qwts[None, :] * (sizes[:, 0] * sizes[:, 1] / 4.0)[:, None]
        # physical quadrature point coordinates (for forcing terms)
        self.qp_xy = self._qp_coords(cx, cy, sizes)

        # interface elements: the elastic face is a run of top-side cells
        x0, x1, _ = mesh.polygon.elastic_span
        i0 = int(np.argmin(np.abs(mesh.xs - x0)))
        self.iface_cols = np.arange(i0, i0 + grid.n_elems)
        self.iface_cells = (ny - 1) * nx + self.iface_cols
        a = np.arange(3)
        self.iface_tracenodes = (2 * ny) * (2 * nx + 1) + 2 * self.iface_cols[:, None] + a[None, :]
        self.n_lambda = grid.n_nodes
        k = np.arange(grid.n_elems)
        self.iface_lam_dofs = np.column_stack([k, k + 1])

        xi, wxi = gauss_unit(nq_interface)
        self.iface_xi = xi
        self.nqi = len(xi)
        h = grid.spans
        self.iface_w = wxi[None, :] * h[:, None]
        self.iface_zq = grid.z[:-1][:, None] + xi[None, :] * h[:, None]
        self.trace_N = quad1d_shape(xi)  # (nqi, 3)
        self.lam_N = np.stack([1 - xi, xi], axis=-1)  # (nqi, 2)
        self.herm_N = np.stack([hermite_shape(xi, hk, 0) for hk in h])  # (m, nqi, 4)
        self.herm_dN = np.stack([hermite_shape(xi, hk, 1) for hk in h])
        self.herm_d2N = np.stack([hermite_shape(xi, hk, 2) for hk in h])

        self.boundary_faces = self._boundary_face_edges()
        self.fixed_mask = self._fixed_udofs()
        self.free_u = np.flatnonzero(~self.fixed_mask)

    @staticmethod
    def _refine(xs):
        out = np.empty(2 * len(xs) - 1)
        out[0::2] = xs
        out[1::2] = 0.5 * (xs[:-1] + xs[1:])
        return out

    def _qp_coords(self, cx, cy, sizes):
        mesh = self.mesh
        ox = mesh.xs[cx] + 0.5 * sizes[:, 0]
        oy = mesh.ys[cy] + 0.5 * sizes[:, 1]
        px = ox[:, None] + 0.5 * sizes[:, 0][:, None] * self.qpts[None, :, 0]
        py = oy[:, None] + 0.5 * sizes[:, 1][:, None] * self.qpts[None, :, 1]
        return np.stack([px, py], axis=-1)

    # -- boundary handling ---------------------------------------------------

    def _face_lookup(self, point):
        poly = self.mesh.polygon
        verts = poly.vertices
        hits = []
        n = len(verts)
        for k in range(n):
            a, b = verts[k], verts[(k + 1) % n]
            d = b - a
            L = np.hypot(d[0], d[1])
            t = np.dot(point - a, d) / (L * L)
            off = abs((point[0] - a[0]) * d[1] - (point[1] - a[1]) * d[0]) / L
            if off < 1e-10 and -1e-10 < t < 1 + 1e-10:
                hits.append(k)
        return hits

    def _side_edges(self):
        """Yield (side, edge q2 nodes (3,), length) for every boundary edge."""
        nx, ny = self.nx, self.ny
        w = 2 * nx + 1
        for i in range(nx):
            yield "bottom", np.array([2 * i, 2 * i + 1, 2 * i + 2]), self.mesh.xs[i + 1] - self.mesh.xs[i]
            base = (2 * ny) * w
            yield "top", base + np.array([2 * i, 2 * i + 1, 2 * i + 2]), self.mesh.xs[i + 1] - self.mesh.xs[i]
        for j in range(ny):
            yield "left", np.array([2 * j * w, (2 * j + 1) * w, (2 * j + 2) * w]), self.mesh.ys[j + 1] - self.mesh.ys[j]
            yield "right", np.array([2 * j * w + 2 * nx, (2 * j + 1) * w + 2 * nx, (2 * j + 2) * w + 2 * nx]), self.mesh.ys[j + 1] - self.mesh.ys[j]

    def _boundary_face_edges(self):
        poly = self.mesh.polygon
        per_face = {}
        for side, nodes, length in self._side_edges():
            mid = 0.5 * (self.vnode_xy[nodes[0]] + self.vnode_xy[nodes[2]])
            hits = self._face_lookup(mid)
            if len(hits) != 1:
                continue
            k = hits[0]
            per_face.setdefault(k, []).append((side, nodes, length))
        out = []
        for k, items in sorted(per_face.items()):
            side = items[0][0]
            nodes = np.stack([it[1] for it in items])
            lengths = np.array([it[2] for it in items])
            out.append(
                BoundaryFaceEdges(k, poly.face_tags[k], side, nodes, lengths, _SIDE_NORMALS[side])
            )
        return out

    def _fixed_udofs(self):
        """Strong per-component zeros implied by the rigid-face tags."""
        fixed = np.zeros(self.n_udof, dtype=bool)
        for bf in self.boundary_faces:
            if bf.tag is FaceTag.ELASTIC:
                continue
            horizontal = bf.side in ("bottom", "top")
            tang_comp = 0 if horizontal else 1
            norm_comp = 1 - tang_comp
            if bf.tag is FaceTag.DYNAMIC_PRESSURE:
                comps = (tang_comp,)
            elif bf.tag is FaceTag.NO_SLIP:
                comps = (0, 1)
            else:  # RIGID_SLIP, SYMMETRY
                comps = (norm_comp,)
            for c in comps:
                fixed[2 * bf.nodes.ravel() + c] = True
        return fixed

    # -- field evaluation ----------------------------------------------------

    def u_cellwise(self, u):
        """Velocity DOF vector -> per-cell coefficient array (ncell, 9, 2)."""
        vals = u.reshape(-1, 2)
        return vals[self.conn_q2]

    def p_cellwise(self, p):
        return p[self.conn_p][..., None]

    def trace_values(self, u):
        """Velocity at interface quadrature points (m, nqi, 2)."""
        vals = u.reshape(-1, 2)[self.iface_tracenodes]  # (m, 3, 2)
        return np.einsum("qa,kac->kqc", self.trace_N, vals)

    def hermite_values(self, w, deriv=0):
        """Hermite DOF vector -> (m, nqi, 2) values (or z-derivatives)."""
        tab = (self.herm_N, self.herm_dN, self.herm_d2N)[deriv]
        g = self.grid
        out = np.empty((g.n_elems, self.nqi, 2))
        for c in (0, 1):
            coeffs = w[g.elem_dofs(c)]  # (m, 4)
            out[:, :, c] = np.einsum("kqa,ka->kq", tab, coeffs)
        return out
