"""Reference polygon, structured quadrilateral mesh, and the interface grid.

The reference domain is a polygon whose outline traces an axis-aligned
rectangle; sides may be split into several collinear faces (interior
angle exactly pi), every other interior angle is pi/2.  Exactly one face
is elastic and must lie on the top side so that the undeformed interface
normal is (0, 1).  Meshes are tensor-product quadrilaterals; the 1D
interface grid shares its nodes with the fluid mesh along the elastic
face, which keeps interface coupling interpolation-free.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidPolygon, MissingElasticFace, NonRectifiablePolygon

_ALIGN_TOL = 1e-12


class FaceTag(Enum):
    ELASTIC = "elastic"
    DYNAMIC_PRESSURE = "pressure"
    NO_SLIP = "noslip"
    RIGID_SLIP = "slip"
    SYMMETRY = "symmetry"


RIGID_TAGS = (FaceTag.DYNAMIC_PRESSURE, FaceTag.NO_SLIP, FaceTag.RIGID_SLIP, FaceTag.SYMMETRY)


@dataclass(frozen=True)
class ReferencePolygon:
    """Closed polygon with tagged faces; face i joins vertex i to i+1 (mod n)."""

    vertices: np.ndarray  # (n, 2)
    face_tags: tuple  # n FaceTags

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "face_tags", tuple(self.face_tags))
        n = len(verts)
        if n < 3:
            raise InvalidPolygon("polygon needs at least 3 vertices")
        if len(self.face_tags) != n:
            raise InvalidPolygon("one tag per face is required")
        self._validate_shape()
        elastic = [i for i, t in enumerate(self.face_tags) if t is FaceTag.ELASTIC]
        if len(elastic) != 1:
            raise InvalidPolygon("exactly one face must carry the elastic tag")
        i = elastic[0]
        a, b = verts[i], verts[(i + 1) % n]
        if abs(a[1] - b[1]) > _ALIGN_TOL:
            raise InvalidPolygon("elastic face must be axis-aligned (horizontal)")
        if abs(a[1] - verts[:, 1].max()) > _ALIGN_TOL:
            raise InvalidPolygon("elastic face must lie on the top side")

    def _validate_shape(self):
        verts = self.vertices
        n = len(verts)
        edges = verts[(np.arange(n) + 1) % n] - verts
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        if np.any(lengths < _ALIGN_TOL):
            raise InvalidPolygon("zero-length face")
        # interior angles <= pi for a CCW outline: cross products never negative
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
        if np.sum(cross) < 0:
            raise InvalidPolygon("vertices must be ordered counter-clockwise")
        if np.any(cross < -_ALIGN_TOL * np.max(lengths) ** 2):
            raise InvalidPolygon("interior angle exceeds pi")

    @property
    def faces(self):
        n = len(self.vertices)
        return [((i, (i + 1) % n), self.face_tags[i]) for i in range(n)]

    @property
    def elastic_face(self):
        return self.face_tags.index(FaceTag.ELASTIC)

    @property
    def elastic_span(self):
        """(x_start, x_end, y_level) of the elastic face, x_start < x_end."""
        (i, j), _ = self.faces[self.elastic_face]
        a, b = self.vertices[i], self.vertices[j]
        x0, x1 = sorted((a[0], b[0]))
        return x0, x1, a[1]

    @property
    def length(self):
        x0, x1, _ = self.elastic_span
        return x1 - x0

    def face_lengths(self):
        n = len(self.vertices)
        out = []
        for i in range(n):
            d = self.vertices[(i + 1) % n] - self.vertices[i]
            out.append(float(np.hypot(d[0], d[1])))
        return out


def unit_square(left=FaceTag.DYNAMIC_PRESSURE, bottom=FaceTag.RIGID_SLIP,
                right=FaceTag.DYNAMIC_PRESSURE):
    """Default demonstration domain: elastic top edge, rigid sides."""
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    tags = (bottom, right, FaceTag.ELASTIC, left)
    return ReferencePolygon(verts, tags)


@dataclass
class Mesh:
    """Tensor-product quadrilateral mesh over an axis-aligned rectangle."""

    xs: np.ndarray
    ys: np.ndarray
    polygon: ReferencePolygon
    nodes: np.ndarray = field(init=False)
    cells: np.ndarray = field(init=False)
    boundary_edges: list = field(init=False)
    interface_nodes: np.ndarray = field(init=False)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.ys = np.asarray(self.ys, dtype=float)
        nx, ny = len(self.xs) - 1, len(self.ys) - 1
        xx, yy = np.meshgrid(self.xs, self.ys, indexing="xy")
        self.nodes = np.column_stack([xx.ravel(), yy.ravel()])
        i = np.arange(nx)
        j = np.arange(ny)
        ii, jj = np.meshgrid(i, j, indexing="xy")
        ii, jj = ii.ravel(), jj.ravel()
        n0 = jj * (nx + 1) + ii
        self.cells = np.column_stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])
        self.boundary_edges = self._tag_boundary()
        self.interface_nodes = self._interface_nodes()

    @property
    def nx(self):
        return len(self.xs) - 1

    @property
    def ny(self):
        return len(self.ys) - 1

    def node_index(self, i, j):
        return j * (self.nx + 1) + i

    def _face_of(self, point):
        verts = self.polygon.vertices
        n = len(verts)
        for k in range(n):
            a, b = verts[k], verts[(k + 1) % n]
            d = b - a
            L = np.hypot(d[0], d[1])
            t = np.dot(point - a, d) / (L * L)
            off = abs((point[0] - a[0]) * d[1] - (point[1] - a[1]) * d[0]) / L
            if off < 1e-10 and -1e-10 < t < 1 + 1e-10:
                return k
        return None

    def _tag_boundary(self):
        nx, ny = self.nx, self.ny
        edges = []
        for i in range(nx):  # bottom, top
            edges.append((self.node_index(i, 0), self.node_index(i + 1, 0)))
            edges.append((self.node_index(i, ny), self.node_index(i + 1, ny)))
        for j in range(ny):  # left, right
            edges.append((self.node_index(0, j), self.node_index(0, j + 1)))
            edges.append((self.node_index(nx, j), self.node_index(nx, j + 1)))
        tagged = []
        for (a, b) in edges:
            mid = 0.5 * (self.nodes[a] + self.nodes[b])
            k = self._face_of(mid)
            if k is None:
                raise NonRectifiablePolygon(f"boundary edge midpoint {mid} lies on no polygon face")
            tagged.append(((a, b), self.polygon.face_tags[k]))
        return tagged

    def _interface_nodes(self):
        x0, x1, ylev = self.polygon.elastic_span
        ids = [
            self.node_index(i, self.ny)
            for i in range(self.nx + 1)
            if x0 - 1e-12 <= self.xs[i] <= x1 + 1e-12
        ]
        ids = np.asarray(ids, dtype=int)
        order = np.argsort(self.nodes[ids, 0], kind="stable")
        return ids[order]

    def cell_sizes(self):
        """Per-cell (hx, hy)."""
        nx, ny = self.nx, self.ny
        hx = np.diff(self.xs)
        hy = np.diff(self.ys)
        i = np.arange(nx * ny) % nx
        j = np.arange(nx * ny) // nx
        return np.column_stack([hx[i], hy[j]])


def build_reference_mesh(polygon, resolution):
    """Mesh the polygon with a uniform (nx, ny) tensor grid.

    Raises NonRectifiablePolygon when the outline is not an axis-aligned
    rectangle trace, when resolution < 2 on either axis, or when a face
    endpoint falls between grid lines (the mesh could not conform).
    """
    if np.isscalar(resolution):
        resolution = (int(resolution), int(resolution))
    nx, ny = int(resolution[0]), int(resolution[1])
    if nx < 2 or ny < 2:
        raise NonRectifiablePolygon("resolution must be at least 2 per axis")

    verts = polygon.vertices
    x0, x1 = verts[:, 0].min(), verts[:, 0].max()
    y0, y1 = verts[:, 1].min(), verts[:, 1].max()
    for k, ((i, j), _) in enumerate(polygon.faces):
        a, b = verts[i], verts[j]
        if abs(a[0] - b[0]) > _ALIGN_TOL and abs(a[1] - b[1]) > _ALIGN_TOL:
            raise NonRectifiablePolygon(f"face {k} is not axis-aligned")
        on_side = (
            abs(a[0] - b[0]) < _ALIGN_TOL and (abs(a[0] - x0) < _ALIGN_TOL or abs(a[0] - x1) < _ALIGN_TOL)
        ) or (
            abs(a[1] - b[1]) < _ALIGN_TOL and (abs(a[1] - y0) < _ALIGN_TOL or abs(a[1] - y1) < _ALIGN_TOL)
        )
        if not on_side:
            raise NonRectifiablePolygon(f"face {k} does not lie on the bounding rectangle")

    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    scale = max(x1 - x0, y1 - y0)
    for v in verts:
        if np.abs(xs - v[0]).min() > 1e-10 * scale or np.abs(ys - v[1]).min() > 1e-10 * scale:
            raise NonRectifiablePolygon(
                f"vertex {tuple(v)} is not resolved by the {nx}x{ny} grid"
            )
    # snap gridlines onto exact vertex coordinates to keep face joints bitwise
    for v in verts:
        k = int(np.argmin(np.abs(xs - v[0])))
        xs[k] = v[0]
        k = int(np.argmin(np.abs(ys - v[1])))
        ys[k] = v[1]
    return Mesh(xs, ys, polygon)


@dataclass
class InterfaceGrid:
    """1D Hermite grid on the elastic face, parameterized by z in [0, L].

    DOF layout: component blocks [all z-DOFs | all r-DOFs]; inside a block
    node i holds (value, slope) at positions (2i, 2i+1).  Clamped DOFs are
    value and slope at both end nodes, for both components.
    """

    z: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        if len(self.z) < 2 or np.any(np.diff(self.z) <= 0):
            raise MissingElasticFace("interface grid needs strictly increasing z values")

    @property
    def n_nodes(self):
        return len(self.z)

    @property
    def n_elems(self):
        return len(self.z) - 1

    @property
    def spans(self):
        return np.diff(self.z)

    @property
    def ndof_comp(self):
        return 2 * self.n_nodes

    @property
    def ndof(self):
        return 4 * self.n_nodes

    @property
    def clamped_mask(self):
        m = np.zeros(self.ndof, dtype=bool)
        nc = self.ndof_comp
        for c in (0, 1):
            m[c * nc + 0] = m[c * nc + 1] = True
            m[c * nc + nc - 2] = m[c * nc + nc - 1] = True
        return m

    @property
    def free(self):
        return np.flatnonzero(~self.clamped_mask)

    def elem_dofs(self, comp):
        """(n_elems, 4) DOF indices of component ``comp`` per element."""
        k = np.arange(self.n_elems)
        base = self.ndof_comp * comp
        return np.column_stack([base + 2 * k, base + 2 * k + 1, base + 2 * k + 2, base + 2 * k + 3])


def interface_grid(mesh):
    """Extract the interface grid from the mesh's elastic-face nodes."""
    if not any(tag is FaceTag.ELASTIC for _, tag in mesh.boundary_edges):
        raise MissingElasticFace("mesh has no elastic-tagged boundary edge")
    x0, _, _ = mesh.polygon.elastic_span
    z = mesh.nodes[mesh.interface_nodes, 0] - x0
    z = np.sort(z)
    z[0] = 0.0
    z[-1] = mesh.polygon.length
    return InterfaceGrid(z)


def write_vtk(path, mesh, point_data=None, cell_data=None):
    """Dump the mesh (and optional fields) as VTK legacy ASCII."""
    lines = [
        "# vtk DataFile Version 3.0",
        "slipfsi mesh",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {len(mesh.nodes)} double",
    ]
    for p in mesh.nodes:
        lines.append(f"{p[0]:.17g} {p[1]:.17g} 0")
    ncell = len(mesh.cells)
    lines.append(f"CELLS {ncell} {5 * ncell}")
    for c in mesh.cells:
        lines.append("4 " + " ".join(str(int(v)) for v in c))
    lines.append(f"CELL_TYPES {ncell}")
    lines.extend(["9"] * ncell)  # VTK_QUAD
    if point_data:
        lines.append(f"POINT_DATA {len(mesh.nodes)}")
        for name, arr in point_data.items():
            arr = np.asarray(arr)
            if arr.ndim == 1:
                lines.append(f"SCALARS {name} double 1")
                lines.append("LOOKUP_TABLE default")
                lines.extend(f"{v:.17g}" for v in arr)
            else:
                lines.append(f"VECTORS {name} double")
                lines.extend(f"{v[0]:.17g} {v[1]:.17g} 0" for v in arr)
    if cell_data:
        lines.append(f"CELL_DATA {ncell}")
        for name, arr in cell_data.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(f"{v:.17g}" for v in np.asarray(arr))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
