"""Fluid sub-problem: source term, assembled blocks, GCL, dissipation."""

import numpy as np
import pytest

from slipfsi import alemap, shell
from slipfsi.errors import AssemblyShapeMismatch, InadmissibleDomain
from slipfsi.fluid import (
    BoundaryData,
    FluidAssembler,
    FluidParams,
    FluidState,
    PressureProfile,
    gcl_residual,
)
from slipfsi.geometry import build_reference_mesh, interface_grid, unit_square
from slipfsi.quadshape import gauss_quad_2d, q2_shape
from slipfsi.spaces import FluidSpaces

from conftest import random_clamped


@pytest.fixture(scope="module")
def setup():
    mesh = build_reference_mesh(unit_square(), (8, 8))
    grid = interface_grid(mesh)
    spaces = FluidSpaces(mesh, grid)
    sparams = shell.StructureParams(1.0, 0.1, 0.5)
    shellop = shell.assemble_shell_operator(sparams, grid)
    asm = FluidAssembler(mesh, grid, spaces, shellop.M)
    return mesh, grid, spaces, sparams, asm


def _random_map(mesh, grid, rng, scale=0.03):
    return alemap.harmonic_extension(random_clamped(grid, rng, scale), mesh, grid)


def _assembled(setup, rng, alpha=0.5, r_vec=None):
    mesh, grid, spaces, sparams, asm = setup
    params = FluidParams(1.0, 0.05, alpha)
    m_old = _random_map(mesh, grid, rng)
    m_new = _random_map(mesh, grid, rng)
    dt = 1e-3
    w = alemap.ale_velocity(m_new, m_old, dt)
    eta = np.zeros(grid.ndof)
    geom = alemap.interface_geometry(eta, grid, mesh.polygon.elastic_span, nq=spaces.nqi)
    u_prev = rng.standard_normal(spaces.n_udof)
    u_prev[spaces.fixed_mask] = 0.0
    v_star = random_clamped(grid, rng)
    sys_ = asm.assemble(u_prev, v_star, m_old, m_new, w, geom, dt, params, sparams, r_vec=r_vec)
    return sys_, params


# -- source term --------------------------------------------------------------


def test_source_term_zero_profile(setup):
    _, _, _, _, asm = setup
    r, norm = asm.source_term(BoundaryData(pressures={}), 0, 1e-2)
    assert np.all(r == 0.0) and norm == 0.0


def test_module_level_op_wrappers(setup):
    import slipfsi.fluid as fl

    _, _, _, _, asm = setup
    r, norm = fl.source_term(asm, BoundaryData(pressures={}), 0, 1e-2)
    assert norm == 0.0
    rng = np.random.default_rng(0)
    sys_, _ = _assembled(setup, rng)
    state, info = fl.fluid_step(asm, sys_)
    assert np.isfinite(info["residual"])


def test_source_term_constant_average(setup):
    _, _, _, _, asm = setup
    bd = BoundaryData(pressures={1: PressureProfile("constant", 2.5)})
    prof = bd.pressures[1]
    for n in range(3):
        assert prof.step_average(n * 0.1, (n + 1) * 0.1) == 2.5


def test_source_term_sine_closed_form():
    prof = PressureProfile("sine", 0.0, 1.0, 1.0, 0.0)  # sin(t)
    avg = prof.step_average(0.0, 0.1)
    exact = (1 - np.cos(0.1)) / 0.1
    assert avg == pytest.approx(exact, abs=1e-15)
    assert avg == pytest.approx(0.049958, abs=1e-6)


def test_source_term_callable_gauss():
    prof = PressureProfile("callable", fn=lambda t: t**3)
    assert prof.step_average(0.0, 1.0) == pytest.approx(0.25, abs=1e-14)


def test_source_term_drives_inward(setup):
    # positive pressure on the left face (index 3 of the unit square)
    # must push fluid in +x: the x-component load is positive there
    _, _, spaces, _, asm = setup
    bd = BoundaryData(pressures={3: PressureProfile("constant", 1.0)})
    r, norm = asm.source_term(bd, 0, 1.0)
    xdofs = r[0::2]
    left_nodes = np.flatnonzero(np.abs(spaces.vnode_xy[:, 0]) < 1e-14)
    assert xdofs[left_nodes].sum() == pytest.approx(1.0, abs=1e-12)  # P * face length
    assert norm == pytest.approx(1.0)


# -- assembled blocks ----------------------------------------------------------


def test_convection_block_antisymmetric(setup):
    rng = np.random.default_rng(5)
    sys_, _ = _assembled(setup, rng)
    scale = np.abs(sys_.conv.data).max()
    for _ in range(10):
        xi = rng.standard_normal(sys_.n_u)
        q = xi @ (sys_.conv @ xi)
        assert abs(q) <= 1e-12 * scale * (xi @ xi)


def test_viscous_block_positive_semidefinite(setup):
    rng = np.random.default_rng(6)
    sys_, _ = _assembled(setup, rng)
    for _ in range(10):
        xi = rng.standard_normal(sys_.n_u)
        assert xi @ (sys_.visc @ xi) >= -1e-12


def test_slip_coupling_scales_inversely_with_alpha(setup):
    rng = np.random.default_rng(7)
    sys_a, _ = _assembled(setup, np.random.default_rng(7), alpha=0.5)
    sys_b, _ = _assembled(setup, np.random.default_rng(7), alpha=5.0)
    na = np.abs(sys_a.slip_uv.data).sum()
    nb = np.abs(sys_b.slip_uv.data).sum()
    assert na / nb == pytest.approx(10.0, rel=1e-10)


def test_rest_input_gives_rest_output(setup):
    mesh, grid, spaces, sparams, asm = setup
    params = FluidParams(1.0, 0.05, 0.5)
    ident = alemap.AleMap.identity(mesh)
    geom = alemap.interface_geometry(np.zeros(grid.ndof), grid, mesh.polygon.elastic_span,
                                     nq=spaces.nqi)
    sys_ = asm.assemble(np.zeros(spaces.n_udof), np.zeros(grid.ndof), ident, ident,
                        np.zeros((len(mesh.nodes), 2)), geom, 1e-3, params, sparams)
    assert np.all(sys_.rhs == 0.0)
    state, info = asm.solve(sys_)
    assert np.all(state.u == 0.0) and np.all(state.p == 0.0)
    assert np.all(state.v_trace == 0.0) and np.all(state.lambda_n == 0.0)


def test_inadmissible_jacobian_rejected(setup):
    mesh, grid, spaces, sparams, asm = setup
    params = FluidParams(1.0, 0.05, 0.5)
    ident = alemap.AleMap.identity(mesh)
    bad = alemap.AleMap.identity(mesh)
    bad.J = bad.J * 1e-5
    geom = alemap.interface_geometry(np.zeros(grid.ndof), grid, mesh.polygon.elastic_span,
                                     nq=spaces.nqi)
    with pytest.raises(InadmissibleDomain):
        asm.assemble(np.zeros(spaces.n_udof), np.zeros(grid.ndof), ident, bad,
                     np.zeros((len(mesh.nodes), 2)), geom, 1e-3, params, sparams)


def test_shape_mismatch_rejected(setup):
    mesh, grid, spaces, sparams, asm = setup
    params = FluidParams(1.0, 0.05, 0.5)
    ident = alemap.AleMap.identity(mesh)
    geom = alemap.interface_geometry(np.zeros(grid.ndof), grid, mesh.polygon.elastic_span,
                                     nq=spaces.nqi)
    with pytest.raises(AssemblyShapeMismatch):
        asm.assemble(np.zeros(spaces.n_udof - 1), np.zeros(grid.ndof), ident, ident,
                     np.zeros((len(mesh.nodes), 2)), geom, 1e-3, params, sparams)


# -- GCL ----------------------------------------------------------------------


def test_gcl_identity_trivial(setup):
    _, _, spaces, _, asm = setup
    rng = np.random.default_rng(8)
    u = rng.standard_normal(spaces.n_udof)
    j = np.abs(rng.standard_normal(spaces.warea.shape)) + 0.5
    assert asm.verify_gcl_identity(u, u, j, j) <= 1e-15


def test_gcl_identity_random_fields(setup):
    _, _, spaces, _, asm = setup
    rng = np.random.default_rng(9)
    for _ in range(50):
        u0 = rng.standard_normal(spaces.n_udof)
        u1 = rng.standard_normal(spaces.n_udof)
        j0 = np.abs(rng.standard_normal(spaces.warea.shape)) + 0.2
        j1 = np.abs(rng.standard_normal(spaces.warea.shape)) + 0.2
        assert asm.verify_gcl_identity(u0, u1, j0, j1, rho_f=1.3) <= 1e-12


def test_gcl_detects_mismatched_quadrature(setup):
    # computing the two sides of the identity under different quadrature
    # rules is exactly the inconsistency the residual must expose
    mesh, grid, spaces, _, asm = setup
    rng = np.random.default_rng(10)
    u0 = rng.standard_normal(spaces.n_udof)
    u1 = rng.standard_normal(spaces.n_udof)
    pts2, wts2 = gauss_quad_2d(2)
    sizes = mesh.cell_sizes()
    w2 = wts2[None, :] * (sizes[:, 0] * sizes[:, 1] / 4.0)[:, None]
    N2_alt = q2_shape(pts2)
    c0 = spaces.u_cellwise(u0)
    c1 = spaces.u_cellwise(u1)
    uq0_a, uq1_a = [np.einsum("cai,qa->cqi", c, spaces.N2) for c in (c0, c1)]
    uq0_b, uq1_b = [np.einsum("cai,qa->cqi", c, N2_alt) for c in (c0, c1)]
    j0 = np.ones(spaces.warea.shape)
    j1 = 1.0 + 0.3 * np.abs(rng.standard_normal(spaces.warea.shape))
    j0b = np.ones(w2.shape)
    j1b = np.ones(w2.shape)  # deliberately inconsistent with side A
    lhs = (spaces.warea * j0 * ((uq1_a - uq0_a) * uq1_a).sum(-1)).sum()
    lhs += 0.5 * (spaces.warea * (j1 - j0) * (uq1_a**2).sum(-1)).sum()
    rhs = 0.5 * (w2 * j1b * (uq1_b**2).sum(-1)).sum()
    rhs += 0.5 * (w2 * j0b * ((uq1_b - uq0_b) ** 2).sum(-1)).sum()
    rhs -= 0.5 * (w2 * j0b * (uq0_b**2).sum(-1)).sum()
    resid = abs(lhs - rhs) / abs(rhs)
    assert resid > 1e-8


def test_gcl_residual_core_zero_for_rest():
    w = np.ones((4, 9))
    z = np.zeros((4, 9, 2))
    assert gcl_residual(w, np.ones((4, 9)), np.ones((4, 9)), z, z) == 0.0


# -- dissipation ---------------------------------------------------------------


def test_dissipation_rest_state(setup):
    mesh, grid, spaces, _, asm = setup
    params = FluidParams(1.0, 0.05, 0.5)
    ident = alemap.AleMap.identity(mesh)
    geom = alemap.interface_geometry(np.zeros(grid.ndof), grid, mesh.polygon.elastic_span,
                                     nq=spaces.nqi)
    state = FluidState(np.zeros(spaces.n_udof), np.zeros(spaces.n_pdof),
                       np.zeros(grid.ndof), np.zeros(spaces.n_lambda))
    assert asm.dissipation(state, state.v_trace, ident, geom, 1e-3, params) == 0.0


def test_dissipation_rigid_rotation_has_no_viscous_part(setup):
    mesh, grid, spaces, _, asm = setup
    params = FluidParams(1.0, 0.05, 0.5)
    ident = alemap.AleMap.identity(mesh)
    geom = alemap.interface_geometry(np.zeros(grid.ndof), grid, mesh.polygon.elastic_span,
                                     nq=spaces.nqi)
    u = np.zeros(spaces.n_udof)
    u[0::2] = -(spaces.vnode_xy[:, 1] - 0.5)  # rotation about the cell center
    u[1::2] = spaces.vnode_xy[:, 0] - 0.5
    state = FluidState(u, np.zeros(spaces.n_pdof), np.zeros(grid.ndof), np.zeros(spaces.n_lambda))
    parts = asm.dissipation_parts(state, state.v_trace, ident, geom, 1e-3, params)
    assert parts["viscous"] <= 1e-13
    assert parts["rigid_slip"] > 0 and parts["interface_slip"] > 0


def test_dissipation_nonnegative_random(setup):
    mesh, grid, spaces, _, asm = setup
    params = FluidParams(1.0, 0.05, 0.5)
    rng = np.random.default_rng(12)
    amap = _random_map(mesh, grid, rng)
    eta = random_clamped(grid, rng, 0.02)
    geom = alemap.interface_geometry(eta, grid, mesh.polygon.elastic_span, nq=spaces.nqi)
    for _ in range(20):
        u = rng.standard_normal(spaces.n_udof)
        v = random_clamped(grid, rng)
        state = FluidState(u, np.zeros(spaces.n_pdof), v, np.zeros(spaces.n_lambda))
        assert asm.dissipation(state, v, amap, geom, 1e-3, params) >= 0.0


# -- frozen-domain Poiseuille oracle --------------------------------------------


def test_navier_slip_poiseuille_profile():
    from slipfsi.driver import SimConfig, run

    mu = alpha = 0.1
    dp = 0.005
    cfg = SimConfig(
        polygon=unit_square(),
        resolution=(16, 16),
        structure=shell.StructureParams(1.0, 0.1, 0.5),
        fluid=FluidParams(1.0, mu, alpha, alpha_rigid=alpha),
        boundary=BoundaryData(pressures={3: PressureProfile("constant", dp)}),
        dt=1e3,
        t_end=3e3,
        frozen_structure=True,
    )
    res = run(cfg)
    assert res.summary["stop_reason"] == "Completed"
    ws = res.workspace
    u = res.trajectory.u[-1]
    r = ws.spaces.vnode_xy[:, 1]
    exact = (dp / (2 * mu)) * (r * (1 - r) + alpha * mu)
    err = np.sqrt(np.mean((u[0::2] - exact) ** 2 + u[1::2] ** 2))
    ref = np.sqrt(np.mean(exact**2))
    assert err / ref < 0.02
