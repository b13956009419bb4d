"""Domain map machinery: harmonic extension, Jacobian fields, guards.

The deforming fluid domain is represented on the fixed mesh through the
map ``A = id + B`` where ``B`` solves a component-wise discrete Laplace
problem with the interface displacement as Dirichlet data on the elastic
face and zero on the rigid boundary.  All per-quadrature-point fields
(gradient, inverse, Jacobian determinant) live on the 3x3 Gauss rule
shared with the fluid assembly, so discrete identities close exactly.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import (
    ClampViolatedInput,
    DegenerateTangent,
    MeshMismatch,
    SolverFailure,
    ZeroDeformation,
)
from .quadshape import gauss_quad_2d, gauss_unit, hermite_shape, q1_dshape


@dataclass
class AleMap:
    """Per-quadrature data of the discrete domain map A = id + B."""

    mesh: "Mesh"
    B: np.ndarray  # (n_nodes, 2) nodal displacement extension
    grad_A: np.ndarray  # (ncell, nq, 2, 2)
    grad_A_inv: np.ndarray
    J: np.ndarray  # (ncell, nq)
    sup_grad_B: float

    @classmethod
    def from_displacement(cls, mesh, B):
        qpts, qwts = gauss_quad_2d(3)
        dN1 = q1_dshape(qpts)
        scale = 2.0 / mesh.cell_sizes()
        coefs = np.ascontiguousarray(B[mesh.cells])
        G = kernels.grad_nodal(coefs, dN1, scale)
        J, Finv, sup = kernels.jac_inv_sup(G)
        gradA = G.copy()
        gradA[..., 0, 0] += 1.0
        gradA[..., 1, 1] += 1.0
        return cls(mesh, B, gradA, Finv, J, float(sup))

    @classmethod
    def identity(cls, mesh):
        return cls.from_displacement(mesh, np.zeros((len(mesh.nodes), 2)))


@dataclass
class InterfaceGeometry:
    """Tangent frame and stretch of the deformed interface at quadrature points."""

    S: np.ndarray  # (m, nqi)
    tau: np.ndarray  # (m, nqi, 2), unit tangent
    nu: np.ndarray  # (m, nqi, 2), unit normal, outward of the fluid
    phi: np.ndarray  # (m, nqi, 2), deformed positions
    zq: np.ndarray  # (m, nqi) reference arc coordinates


@dataclass
class DomainStatus:
    j_min: float
    injectivity_margin: float
    admissible: bool


class ExtensionSolver:
    """Factorized bilinear Laplace solver for the displacement extension."""

    def __init__(self, mesh):
        self.mesh = mesh
        qpts, qwts = gauss_quad_2d(2)
        dN1 = q1_dshape(qpts)
        sizes = mesh.cell_sizes()
        scale = 2.0 / sizes
        warea = qwts[None, :] * (sizes[:, 0] * sizes[:, 1] / 4.0)[:, None]
        dphys = dN1[None, :, :, :] * scale[:, None, None, :]
        elem = np.einsum("cq,cqak,cqbk->cab", warea, dphys, dphys)
        rows, cols, vals = kernels.scatter_square(elem, mesh.cells, len(mesh.nodes))
        K = sp.coo_matrix((vals, (rows, cols)), shape=(len(mesh.nodes),) * 2).tocsr()

        nx, ny = mesh.nx, mesh.ny
        bdry = np.zeros(len(mesh.nodes), dtype=bool)
        idx = np.arange(len(mesh.nodes))
        i = idx % (nx + 1)
        j = idx // (nx + 1)
        bdry[(i == 0) | (i == nx) | (j == 0) | (j == ny)] = True
        self.bdry = bdry
        self.interior = np.flatnonzero(~bdry)
        self.K = K
        self.K_ii = K[self.interior][:, self.interior].tocsc()
        self.K_ib = K[self.interior][:, np.flatnonzero(bdry)].tocsr()
        self.bdry_idx = np.flatnonzero(bdry)
        try:
            self._solve = spla.factorized(self.K_ii)
        except RuntimeError as exc:
            raise SolverFailure(f"extension stiffness factorization failed: {exc}") from exc

    def extend(self, bdry_values):
        """Solve the two Dirichlet problems; returns nodal B and the residual."""
        g = bdry_values[self.bdry_idx]
        rhs = -self.K_ib @ g
        B = np.zeros((len(self.mesh.nodes), 2))
        B[self.bdry_idx] = g
        resid = 0.0
        for c in (0, 1):
            x = self._solve(rhs[:, c])
            B[self.interior, c] = x
            r = self.K_ii @ x - rhs[:, c]
            den = max(np.linalg.norm(rhs[:, c]), 1e-30)
            resid = max(resid, np.linalg.norm(r) / den)
        return B, resid


def _interface_values(eta, grid):
    """(n_nodes, 2) displacement values at interface nodes from Hermite DOFs."""
    n = grid.n_nodes
    vals = np.empty((n, 2))
    for c in (0, 1):
        vals[:, c] = eta[c * grid.ndof_comp : (c + 1) * grid.ndof_comp : 2]
    return vals


def check_clamped(eta, grid):
    if np.any(eta[grid.clamped_mask] != 0.0):
        raise ClampViolatedInput("interface field violates the clamped end conditions")


def harmonic_extension(eta, mesh, grid, solver=None):
    """Extend the interface displacement into the domain; returns an AleMap."""
    check_clamped(eta, grid)
    if solver is None:
        solver = ExtensionSolver(mesh)
    if solver.mesh is not mesh:
        raise MeshMismatch("extension solver was built on a different mesh")
    g = np.zeros((len(mesh.nodes), 2))
    g[mesh.interface_nodes] = _interface_values(eta, grid)
    B, resid = solver.extend(g)
    if resid > 1e-10:
        raise SolverFailure(f"extension solve residual {resid:.3e} exceeds 1e-10")
    return AleMap.from_displacement(mesh, B)


def interface_geometry(eta, grid, elastic_span=(0.0, None, 0.0), nq=4):
    """Stretch S, tangent, outward normal, and deformed positions on the interface.

    S(z) = sqrt((1 + d_z eta_z)^2 + (d_z eta_r)^2); tau is the normalized
    derivative of the deformation and nu its +pi/2 rotation, which points
    out of the fluid for a top-edge interface (nu = (0,1) at eta = 0).
    """
    x0, _, ylev = elastic_span
    xi, _ = gauss_unit(nq)
    m = grid.n_elems
    h = grid.spans
    zq = grid.z[:-1][:, None] + xi[None, :] * h[:, None]
    vals = np.empty((m, nq, 2))
    ders = np.empty((m, nq, 2))
    for c in (0, 1):
        coeffs = eta[grid.elem_dofs(c)]
        Hn = np.stack([hermite_shape(xi, hk, 0) for hk in h])
        Hd = np.stack([hermite_shape(xi, hk, 1) for hk in h])
        vals[:, :, c] = np.einsum("kqa,ka->kq", Hn, coeffs)
        ders[:, :, c] = np.einsum("kqa,ka->kq", Hd, coeffs)
    dphi = ders.copy()
    dphi[:, :, 0] += 1.0
    S = np.sqrt(dphi[:, :, 0] ** 2 + dphi[:, :, 1] ** 2)
    if np.any(S <= 1e-12):
        raise DegenerateTangent("interface stretch factor vanished")
    tau = dphi / S[:, :, None]
    nu = np.stack([-tau[:, :, 1], tau[:, :, 0]], axis=-1)
    phi = np.empty_like(vals)
    phi[:, :, 0] = x0 + zq + vals[:, :, 0]
    phi[:, :, 1] = ylev + vals[:, :, 1]
    return InterfaceGeometry(S, tau, nu, phi, zq)


def ale_velocity(map_new, map_old, dt):
    """Nodal mesh velocity w = (B_new - B_old) / dt."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if map_new.mesh is not map_old.mesh or map_new.B.shape != map_old.B.shape:
        raise MeshMismatch("maps were built on different meshes")
    return (map_new.B - map_old.B) / dt


def transformed_gradient(spaces, u, amap):
    """Velocity gradient composed with the inverse map gradient, per qp."""
    coefs = np.ascontiguousarray(spaces.u_cellwise(u))
    G = kernels.grad_nodal(coefs, spaces.dN2, spaces.scale)
    return np.einsum("cqik,cqkj->cqij", G, amap.grad_A_inv)


def transformed_divergence(spaces, u, amap):
    """Trace of the transformed gradient via a dedicated contraction path."""
    coefs = np.ascontiguousarray(spaces.u_cellwise(u))
    G = kernels.grad_nodal(coefs, spaces.dN2, spaces.scale)
    return np.einsum("cqik,cqki->cq", G, amap.grad_A_inv)


def korn_ratio(spaces, u, amap):
    """|grad^eta u| / |D^eta(u)| in the fixed-domain L2 norms (diagnostic)."""
    T = transformed_gradient(spaces, u, amap)
    D = 0.5 * (T + np.swapaxes(T, -1, -2))
    w = spaces.warea
    num = np.sqrt(kernels.wfrob(w, T, T))
    den = np.sqrt(kernels.wfrob(w, np.ascontiguousarray(D), np.ascontiguousarray(D)))
    if den <= 1e-14:
        raise ZeroDeformation("symmetrized transformed gradient is numerically zero")
    return num / den


def check_admissible(amap, c_omega, j_floor):
    """Jacobian-floor and injectivity-margin guards as a DomainStatus."""
    j_min = float(amap.J.min())
    margin = float(c_omega - amap.sup_grad_B)
    return DomainStatus(j_min, margin, bool(j_min >= j_floor and margin > 0.0))
