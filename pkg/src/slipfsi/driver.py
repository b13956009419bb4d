"""Time loop: structure half-step, domain-map update, fluid half-step.

Each step runs the three sub-solves in a fixed order and then re-checks
every discrete identity the scheme is built on: the structure energy
identity, the quadrature-level geometric conservation law, the fluid
energy inequality, and the domain admissibility guards.  Any breach
flags the run FAILED; domain degeneration ends the run cleanly with the
step index recorded (the discrete analogue of a finite existence time).
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import alemap, fluid, geometry, shell
from .errors import IncompatibleInitialData
from .spaces import FluidSpaces

LEDGER_COLUMNS = (
    "step", "t", "E_half", "E_full", "D", "gcl_res", "struct_res",
    "fluid_margin", "j_min", "inj_margin", "div_res", "normal_res",
)

_GEOMETRIC_REASONS = {"eta0_guard", "inadmissible_map"}


class StopReason(enum.Enum):
    COMPLETED = "Completed"
    DOMAIN_DEGENERATE = "DomainDegenerate"
    SOLVER_FAILURE = "SolverFailure"


@dataclass
class SimConfig:
    polygon: geometry.ReferencePolygon
    resolution: tuple
    structure: shell.StructureParams
    fluid: fluid.FluidParams
    boundary: fluid.BoundaryData
    dt: float
    t_end: float
    c_omega: float = 0.5
    j_floor: float = 1e-3
    frozen_structure: bool = False
    dump_fields: bool = False
    body_force: object = None  # callable(t, xy (...,2)) -> (...,2), API only

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end cannot be negative")
        # t_end = 0 is the degenerate empty horizon: run() returns the
        # initial record and stops Completed without stepping

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))


@dataclass
class EnergyLedger:
    """Per-step energies, residuals, guards, and the telescoped sums."""

    rows: list = field(default_factory=list)
    sum_mass_inc: float = 0.0  # (rho_f/2) int J^n |u^{n+1}-u^n|^2
    sum_robin_inc: float = 0.0  # (rho_s h/2) |v^{n+1}-v^{n+1/2}|^2
    sum_elastic_inc: float = 0.0  # (1/2) <K d_eta, d_eta>
    sum_struct_inc: float = 0.0  # (rho_s h/2) |v^{n+1/2}-v^n|^2
    sum_D: float = 0.0

    def append(self, **kw):
        self.rows.append({c: kw.get(c, 0.0) for c in LEDGER_COLUMNS})

    def column(self, name):
        return np.array([r[name] for r in self.rows])

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(LEDGER_COLUMNS) + "\n")
            for r in self.rows:
                fh.write(f"{int(r['step'])}," + ",".join(f"{r[c]:.17g}" for c in LEDGER_COLUMNS[1:]) + "\n")


@dataclass
class Trajectory:
    """Piecewise-constant trajectory snapshots plus the stop record."""

    times: list = field(default_factory=list)
    eta: list = field(default_factory=list)
    v: list = field(default_factory=list)
    v_star: list = field(default_factory=list)
    u: list = field(default_factory=list)
    p: list = field(default_factory=list)
    j_status: list = field(default_factory=list)
    stop_reason: StopReason = StopReason.COMPLETED
    stop_step: int = 0

    @property
    def n_stored(self):
        return len(self.times)

    @property
    def dt(self):
        return self.times[1] - self.times[0] if len(self.times) > 1 else 0.0

    @property
    def duration(self):
        return self.times[-1] if self.times else 0.0


@dataclass
class RunResult:
    trajectory: Trajectory
    ledger: EnergyLedger
    summary: dict
    workspace: object


class Workspace:
    """Mesh- and parameter-derived objects reused across all steps."""

    def __init__(self, config):
        self.config = config
        self.mesh = geometry.build_reference_mesh(config.polygon, config.resolution)
        self.grid = geometry.interface_grid(self.mesh)
        self.spaces = FluidSpaces(self.mesh, self.grid)
        self.shellop = shell.assemble_shell_operator(config.structure, self.grid)
        self.ext_solver = alemap.ExtensionSolver(self.mesh)
        self.assembler = fluid.FluidAssembler(
            self.mesh, self.grid, self.spaces, self.shellop.M,
            frozen_structure=config.frozen_structure,
        )
        self.span = self.mesh.polygon.elastic_span

    def extension(self, eta):
        return alemap.harmonic_extension(eta, self.mesh, self.grid, self.ext_solver)

    def geometry_of(self, eta):
        return alemap.interface_geometry(eta, self.grid, self.span, nq=self.spaces.nqi)

    def total_energy(self, u, amap, struct_state, which_v="v"):
        kin_s, ela = shell.structure_energy(self.shellop, struct_state, which_v)
        kin_f = self.assembler.kinetic_energy(u, amap, self.config.fluid.rho_f)
        return kin_f + kin_s + ela


def build_workspace(config):
    return Workspace(config)


def _interface_field(grid, kind, amplitude):
    out = np.zeros(grid.ndof)
    if kind == "zero" or amplitude == 0.0:
        return out
    if kind != "sine_normal":
        raise ValueError(f"unknown initial field kind {kind!r}")
    L = grid.z[-1]
    n = grid.n_nodes
    nc = grid.ndof_comp
    out[nc + 2 * np.arange(n)] = amplitude * np.sin(np.pi * grid.z / L)
    out[nc + 2 * np.arange(n) + 1] = amplitude * (np.pi / L) * np.cos(np.pi * grid.z / L)
    out[grid.clamped_mask] = 0.0
    return out


def initialize(config, ws=None):
    """Build initial states; raises IncompatibleInitialData with reason codes."""
    ws = ws or build_workspace(config)
    grid = ws.grid
    reasons = []

    eta0 = _interface_field(grid, config.boundary.eta0_kind, config.boundary.eta0_amplitude)
    v0 = _interface_field(grid, config.boundary.v0_kind, config.boundary.v0_amplitude)
    if np.any(eta0[grid.clamped_mask] != 0.0) or np.any(v0[grid.clamped_mask] != 0.0):
        reasons.append("clamp")

    if config.boundary.u0 is None:
        u0 = np.zeros(ws.spaces.n_udof)
    else:
        u0 = np.asarray(config.boundary.u0, dtype=float)
        if u0.shape != (ws.spaces.n_udof,):
            raise IncompatibleInitialData(["shape"], "u0 has the wrong number of DOFs")

    if reasons:
        raise IncompatibleInitialData(reasons)

    map0 = ws.extension(eta0)
    status = alemap.check_admissible(map0, config.c_omega, config.j_floor)

    # transformed divergence-free check against the initial map
    scale = max(1.0, float(np.abs(u0).max()))
    div_rows = _divergence_rows(ws, u0, map0)
    if np.abs(div_rows).max() > 1e-10 * scale:
        reasons.append("divergence")

    geom0 = ws.geometry_of(eta0)
    tr = ws.spaces.trace_values(u0) - ws.spaces.hermite_values(v0)
    ntrace = np.abs(np.einsum("kqc,kqc->kq", tr, geom0.nu)).max()
    if ntrace > 1e-10 * scale:
        reasons.append("normal_trace")

    if map0.sup_grad_B > config.c_omega / 2:
        reasons.append("eta0_guard")
    if not status.admissible:
        reasons.append("inadmissible_map")
    if reasons:
        err = IncompatibleInitialData(reasons)
        err.status = status
        raise err

    struct0 = shell.StructureState(eta0, v0, v0.copy())
    fluid0 = fluid.FluidState(
        u0, np.zeros(ws.spaces.n_pdof), v0.copy(), np.zeros(ws.spaces.n_lambda)
    )
    return struct0, fluid0, map0


def _divergence_rows(ws, u, amap):
    """Residual of the J-weighted transformed-divergence constraint rows."""
    from . import kernels

    spc = ws.spaces
    g2 = kernels.tgrad_basis(spc.dN2, spc.scale, np.ascontiguousarray(amap.grad_A_inv))
    dpe = kernels.div_elem(spc.N1, g2, np.ascontiguousarray(spc.warea * amap.J))
    ue = u.reshape(-1, 2)[spc.conn_q2].reshape(len(spc.conn_q2), 18)
    contrib = np.einsum("cpe,ce->cp", dpe, ue)
    out = np.zeros(spc.n_pdof)
    np.add.at(out, ws.mesh.cells.ravel(), contrib.ravel())
    return out


@dataclass
class _StepOutput:
    struct: shell.StructureState
    fstate: fluid.FluidState
    amap: alemap.AleMap
    degenerate: bool
    row: dict
    increments: tuple


def step(ws, struct, fstate, amap, n):
    """One full splitting step; returns a _StepOutput."""
    cfg = ws.config
    dt = cfg.dt
    frozen = cfg.frozen_structure

    if frozen:
        struct_new = struct.copy()
        struct_new.v_star = struct.v.copy()
        struct_res = 0.0
    else:
        # the fluid-updated velocity is the half-step's initial velocity
        pre = shell.StructureState(struct.eta, fstate.v_trace, struct.v_star)
        struct_new = ws.shellop.step(pre, dt)
        struct_res = shell.verify_structure_identity(ws.shellop, pre, struct_new, dt)

    e_half = ws.total_energy(fstate.u, amap, struct_new, which_v="v_star")

    if frozen:
        map_new = amap
    else:
        map_new = ws.extension(struct_new.eta)
    status = alemap.check_admissible(map_new, cfg.c_omega, cfg.j_floor)
    row = {
        "step": n + 1,
        "t": (n + 1) * dt,
        "E_half": e_half,
        "struct_res": struct_res,
        "j_min": status.j_min,
        "inj_margin": status.injectivity_margin,
    }
    if not status.admissible:
        row["E_full"] = e_half
        return _StepOutput(struct_new, fstate, map_new, True, row, (0.0, 0.0, 0.0, 0.0))

    w = alemap.ale_velocity(map_new, amap, dt)
    geom = ws.geometry_of(struct_new.eta)
    r_vec, r_norm = ws.assembler.source_term(cfg.boundary, n, dt)
    body = None
    if cfg.body_force is not None:
        body = np.ascontiguousarray(cfg.body_force((n + 1) * dt, ws.spaces.qp_xy))
    system = ws.assembler.assemble(
        fstate.u, struct_new.v_star, amap, map_new, w, geom, dt,
        cfg.fluid, cfg.structure, r_vec=r_vec, body_qp=body, j_floor=cfg.j_floor,
    )
    fnew, info = ws.assembler.solve(system)

    gcl_res = ws.assembler.verify_gcl_identity(fstate.u, fnew.u, amap, map_new,
                                               rho_f=cfg.fluid.rho_f)
    D = ws.assembler.dissipation(fnew, fnew.v_trace, map_new, geom, dt, cfg.fluid)

    struct_after = struct_new.copy()
    struct_after.v = fnew.v_trace.copy()
    e_full = ws.total_energy(fnew.u, map_new, struct_after, which_v="v")

    mass_inc = ws.assembler.mass_increment(fstate.u, fnew.u, amap, cfg.fluid.rho_f)
    rhoh = cfg.structure.rho_s * cfg.structure.h
    dv = fnew.v_trace - struct_new.v_star
    robin_inc = 0.5 * rhoh * ws.shellop.mass_norm2(dv)
    deta = struct_new.eta - struct.eta
    elastic_inc = 0.5 * ws.shellop.elastic_form(deta, deta)
    dvh = struct_new.v_star - fstate.v_trace
    struct_inc = 0.5 * rhoh * ws.shellop.mass_norm2(dvh)

    margin = fluid.verify_fluid_energy_inequality(e_half, e_full, mass_inc, robin_inc, D)

    row.update(
        E_full=e_full, D=D, gcl_res=gcl_res, fluid_margin=margin,
        div_res=info["div_res"], normal_res=info["normal_res"],
    )
    row["_r_norm"] = r_norm
    row["_rhs_scale"] = max(1.0, float(np.linalg.norm(system.rhs)))
    row["_slip_res"] = info["slip_res"]
    return _StepOutput(struct_after, fnew, map_new, False,
                       row, (mass_inc, robin_inc, elastic_inc, struct_inc))


def run(config, ws=None, collect_fields=True, callback=None):
    """Full simulation; returns a RunResult.  FAILED is a flag, not an exception."""
    ws = ws or build_workspace(config)
    ledger = EnergyLedger()
    traj = Trajectory()
    failures = []
    r_l2_sq = 0.0
    has_forcing = any(
        not (p.kind == "constant" and p.value == 0.0)
        for p in config.boundary.pressures.values()
    ) or config.body_force is not None

    try:
        struct, fstate, amap = initialize(config, ws)
    except IncompatibleInitialData as err:
        if set(err.reasons) <= _GEOMETRIC_REASONS:
            status = getattr(err, "status", None)
            ledger.append(step=0, t=0.0,
                          j_min=status.j_min if status else 0.0,
                          inj_margin=status.injectivity_margin if status else 0.0)
            traj.stop_reason = StopReason.DOMAIN_DEGENERATE
            traj.stop_step = 0
            if status is not None:
                traj.j_status.append(status)
            summary = _summary(config, ledger, traj, failures, 0.0, 0.0, has_forcing)
            return RunResult(traj, ledger, summary, ws)
        raise

    e0 = ws.total_energy(fstate.u, amap, struct, which_v="v")
    status0 = alemap.check_admissible(amap, config.c_omega, config.j_floor)
    ledger.append(step=0, t=0.0, E_half=e0, E_full=e0,
                  j_min=status0.j_min, inj_margin=status0.injectivity_margin)
    _snapshot(traj, 0.0, struct, fstate, status0)
    if callback is not None:
        callback(0, ws, amap, fstate)

    n_steps = config.n_steps
    e_prev = e0
    for n in range(n_steps):
        try:
            out = step(ws, struct, fstate, amap, n)
        except fluid.SolverFailure as exc:
            traj.stop_reason = StopReason.SOLVER_FAILURE
            traj.stop_step = n + 1
            failures.append(f"step {n + 1}: {exc}")
            break
        row = out.row
        if out.degenerate:
            ledger.append(**row)
            traj.stop_reason = StopReason.DOMAIN_DEGENERATE
            traj.stop_step = n + 1
            traj.j_status.append(alemap.check_admissible(out.amap, config.c_omega, config.j_floor))
            break

        r_norm = row.pop("_r_norm")
        rhs_scale = row.pop("_rhs_scale")
        slip_res = row.pop("_slip_res")
        r_l2_sq += config.dt * r_norm**2

        mass_inc, robin_inc, elastic_inc, struct_inc = out.increments
        ledger.sum_mass_inc += mass_inc
        ledger.sum_robin_inc += robin_inc
        ledger.sum_elastic_inc += elastic_inc
        ledger.sum_struct_inc += struct_inc
        ledger.sum_D += row["D"]

        if row["struct_res"] > 1e-10:
            failures.append(f"step {n + 1}: structure identity residual {row['struct_res']:.3e}")
        if row["gcl_res"] > 1e-12:
            failures.append(f"step {n + 1}: GCL residual {row['gcl_res']:.3e}")
        if not has_forcing and row["fluid_margin"] < -1e-10 * max(1.0, e0):
            failures.append(f"step {n + 1}: energy margin {row['fluid_margin']:.3e}")
        if not has_forcing and row["E_half"] > e_prev + 1e-10 * max(1.0, e0):
            failures.append(f"step {n + 1}: structure half-step energy grew")
        tol_lin = 1e-9 * rhs_scale
        if row["div_res"] > tol_lin or row["normal_res"] > tol_lin or slip_res > tol_lin:
            failures.append(f"step {n + 1}: constraint residual exceeds solver tolerance")

        ledger.append(**row)
        struct, fstate, amap = out.struct, out.fstate, out.amap
        e_prev = row["E_full"]
        status = alemap.check_admissible(amap, config.c_omega, config.j_floor)
        if collect_fields:
            _snapshot(traj, row["t"], struct, fstate, status)
        if callback is not None:
            callback(n + 1, ws, amap, fstate)
        traj.stop_step = n + 1

    else:
        traj.stop_reason = StopReason.COMPLETED

    summary = _summary(config, ledger, traj, failures, e0, r_l2_sq, has_forcing)
    return RunResult(traj, ledger, summary, ws)


def _snapshot(traj, t, struct, fstate, status):
    traj.times.append(t)
    traj.eta.append(struct.eta.copy())
    traj.v.append(struct.v.copy())
    traj.v_star.append(struct.v_star.copy())
    traj.u.append(fstate.u.copy())
    traj.p.append(fstate.p.copy())
    traj.j_status.append(status)


def _summary(config, ledger, traj, failures, e0, r_l2_sq, has_forcing):
    e_full = ledger.column("E_full")
    e_max = float(e_full.max()) if len(e_full) else 0.0
    sums = {
        "mass_increment": ledger.sum_mass_inc,
        "robin_increment": ledger.sum_robin_inc,
        "elastic_increment": ledger.sum_elastic_inc,
        "structure_increment": ledger.sum_struct_inc,
    }
    if has_forcing:
        c_tilde = max(0.0, e_max - e0) / r_l2_sq if r_l2_sq > 0 else 0.0
    else:
        c_tilde = 0.0
        if len(e_full) > 1 and e_full[-1] > e0 + 1e-9:
            failures.append("final energy exceeds the initial energy")
        bound = 2 * e0 + 1e-9
        for name, val in sums.items():
            if val > bound:
                failures.append(f"telescoped sum {name} exceeds 2*E0")
    return {
        "stop_reason": traj.stop_reason.value,
        "stop_step": traj.stop_step,
        "failed": bool(failures),
        "failures": failures,
        "E0": e0,
        "E_final": float(e_full[-1]) if len(e_full) else 0.0,
        "E_max": e_max,
        "sum_D": ledger.sum_D,
        "difference_sums": sums,
        "R_l2_sq": r_l2_sq,
        "C_tilde": c_tilde,
        "n_rows": len(ledger.rows),
    }
