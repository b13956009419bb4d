"""Post-hoc compactness diagnostics on stored trajectories.

Time-shift norms ||f(.-h) - f||_{L2(h,T;X)} are evaluated exactly from
the piecewise-constant-in-time trajectory structure (no time quadrature
error); the piecewise-linear displacement interpolant is handled with a
two-point Gauss rule per overlap subinterval, exact for its quadratic
integrand.  Spatial norms reuse the solver's own mass and bending
matrices.  A log-log fit extracts the h^beta scaling rate.
"""

import dataclasses

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import DegenerateFit, ShiftTooLarge
from .shell import _component_matrices

SHIFT_FIELDS = ("u", "v", "v_star", "eta", "eta_tilde")


class TrajectoryNorms:
    """Gram forms for trajectory snapshots, shared with the solver."""

    def __init__(self, ws):
        spc = ws.spaces
        e9 = kernels.mass_elem(np.ascontiguousarray(spc.warea), spc.N2)
        rows, cols, vals = kernels.scatter_square(e9, spc.conn_q2, spc.n_vnodes)
        self.M2 = sp.coo_matrix((vals, (rows, cols)), shape=(spc.n_vnodes,) * 2).tocsr()
        self.M_h = ws.shellop.M
        Mhat, D2 = _component_matrices(ws.grid)
        n = ws.grid.ndof_comp
        self.D2 = np.zeros((2 * n, 2 * n))
        self.D2[:n, :n] = D2
        self.D2[n:, n:] = D2

    def norm2(self, field, vec):
        if field == "u":
            ux, uy = vec[0::2], vec[1::2]
            return float(ux @ (self.M2 @ ux) + uy @ (self.M2 @ uy))
        if field in ("v", "v_star"):
            return float(vec @ (self.M_h @ vec))
        # eta / eta_tilde: H2 seminorm
        return float(vec @ (self.D2 @ vec))


def _snapshots(traj, field):
    return {"u": traj.u, "v": traj.v, "v_star": traj.v_star,
            "eta": traj.eta, "eta_tilde": traj.eta}[field]


class InterpolantView:
    """Read-only continuous piecewise-linear view of the displacement.

    Interpolates the stored snapshots in time; its time derivative on
    each open subinterval equals the intermediate velocity snapshot.
    """

    def __init__(self, traj):
        self.traj = traj
        self.dt = traj.dt

    def eta(self, t):
        times = self.traj.times
        n = min(int(np.floor(t / self.dt + 1e-12)), len(times) - 2)
        n = max(n, 0)
        theta = (t - times[n]) / self.dt
        theta = min(max(theta, 0.0), 1.0)
        return (1 - theta) * self.traj.eta[n] + theta * self.traj.eta[n + 1]

    def deta_dt(self, t):
        n = min(int(np.floor(t / self.dt + 1e-12)), len(self.traj.times) - 2)
        n = max(n, 0)
        return (self.traj.eta[n + 1] - self.traj.eta[n]) / self.dt


def _pc_value(snaps, t, dt, nmax):
    """Piecewise-constant evaluation: snapshot n covers ((n-1)dt, n dt]."""
    n = int(np.ceil(t / dt - 1e-12))
    return snaps[min(max(n, 0), nmax)]


def time_shift_norm(traj, field, h, norms):
    """||T_h f - f||_{L2(h,T;X)} for a stored trajectory field."""
    if field not in SHIFT_FIELDS:
        raise ValueError(f"unknown field {field!r}")
    if h <= 0:
        raise ValueError("shift must be positive")
    T = traj.duration
    dt = traj.dt
    if h >= T:
        raise ShiftTooLarge(f"shift {h} is not below the trajectory duration {T}")
    if field == "eta_tilde":
        return _shift_norm_linear(traj, h, norms)

    snaps = _snapshots(traj, field)
    N = len(snaps) - 1
    l = h / dt
    l_int = int(round(l))
    if abs(l - l_int) < 1e-9 and l_int >= 1:
        total = 0.0
        for n in range(l_int + 1, N + 1):
            total += dt * norms.norm2(field, snaps[n] - snaps[n - l_int])
        return float(np.sqrt(total))
    if h < dt:
        total = 0.0
        for n in range(1, N):
            total += h * norms.norm2(field, snaps[n + 1] - snaps[n])
        return float(np.sqrt(total))
    return _shift_norm_generic(snaps, field, h, dt, N, T, norms)


def _shift_norm_generic(snaps, field, h, dt, N, T, norms):
    pts = set()
    for n in range(N + 1):
        for t in (n * dt, n * dt + h):
            if h <= t <= T:
                pts.add(round(t, 14))
    pts = sorted(pts | {h, T})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a < 1e-14:
            continue
        mid = 0.5 * (a + b)
        fi = _pc_value(snaps, mid, dt, N)
        fj = _pc_value(snaps, mid - h, dt, N)
        if fi is fj:
            continue
        total += (b - a) * norms.norm2(field, fi - fj)
    return float(np.sqrt(total))


def _shift_norm_linear(traj, h, norms):
    """Shift norm of the piecewise-linear interpolant, exact per subinterval."""
    view = InterpolantView(traj)
    dt, T = traj.dt, traj.duration
    N = len(traj.times) - 1
    pts = set()
    for n in range(N + 1):
        for t in (n * dt, n * dt + h):
            if h <= t <= T:
                pts.add(round(t, 14))
    pts = sorted(pts | {h, T})
    gp = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a < 1e-14:
            continue
        for x in gp:
            t = a + x * (b - a)
            diff = view.eta(t) - view.eta(t - h)
            total += 0.5 * (b - a) * norms.norm2("eta", diff)
    return float(np.sqrt(total))


def sqrt_fit(h_values, values):
    """Least-squares power-law fit value = C * h^beta; returns (C, beta)."""
    h_values = np.asarray(h_values, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(h_values) != len(values) or len(h_values) < 2:
        raise ValueError("need matching h and value arrays with at least 2 entries")
    mask = values > 0
    if not mask.any():
        raise DegenerateFit("all shift values are zero")
    if mask.sum() < 2:
        raise DegenerateFit("too few nonzero shift values for a fit")
    lh = np.log(h_values[mask])
    lv = np.log(values[mask])
    beta, logc = np.polyfit(lh, lv, 1)
    return float(np.exp(logc)), float(beta)


def shift_report(traj, ws, h_values, fields=("u", "v", "v_star", "eta_tilde")):
    """Shift norms and fitted (C, beta) per field over an h grid."""
    norms = TrajectoryNorms(ws)
    table = []
    fits = {}
    for f in fields:
        vals = [time_shift_norm(traj, f, h, norms) for h in h_values]
        for h, v in zip(h_values, vals):
            table.append((f, h, v))
        try:
            fits[f] = sqrt_fit(h_values, vals)
        except DegenerateFit:
            fits[f] = None
    return table, fits


def _overlap_l2_sq(times_a, snaps_a, times_b, snaps_b, norm2):
    dta, dtb = times_a[1] - times_a[0], times_b[1] - times_b[0]
    T = min(times_a[-1], times_b[-1])
    pts = sorted({round(t, 14) for t in list(times_a) + list(times_b) if t <= T + 1e-14})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a < 1e-14:
            continue
        mid = 0.5 * (a + b)
        fa = _pc_value(snaps_a, mid, dta, len(snaps_a) - 1)
        fb = _pc_value(snaps_b, mid, dtb, len(snaps_b) - 1)
        total += (b - a) * norm2(fa - fb)
    return total


def _overlap_linf(times_a, snaps_a, times_b, snaps_b, norm2):
    dta, dtb = times_a[1] - times_a[0], times_b[1] - times_b[0]
    T = min(times_a[-1], times_b[-1])
    pts = sorted({round(t, 14) for t in list(times_a) + list(times_b) if t <= T + 1e-14})
    worst = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a < 1e-14:
            continue
        mid = 0.5 * (a + b)
        fa = _pc_value(snaps_a, mid, dta, len(snaps_a) - 1)
        fb = _pc_value(snaps_b, mid, dtb, len(snaps_b) - 1)
        worst = max(worst, norm2(fa - fb))
    return np.sqrt(worst)


def refinement_study(config, dt_list, runner=None):
    """Cauchy differences between consecutive time resolutions.

    Returns rows (dt_coarse, dt_fine, diff_u, diff_eta) where diff_u is
    the L2(0,T;L2) distance of the velocity trajectories and diff_eta the
    Linf(0,T;L2) distance of the displacements, both on the shared mesh.
    """
    from .driver import run as _run

    runner = runner or _run
    dt_list = list(dt_list)
    if any(b >= a for a, b in zip(dt_list[:-1], dt_list[1:])):
        raise ValueError("dt_list must be strictly decreasing")
    results = []
    for dt in dt_list:
        cfg = dataclasses.replace(config, dt=dt)
        results.append(runner(cfg))
    if len(results) < 2:
        return []
    norms = TrajectoryNorms(results[0].workspace)
    rows = []
    for ra, rb, dta, dtb in zip(results[:-1], results[1:], dt_list[:-1], dt_list[1:]):
        ta, tb = ra.trajectory, rb.trajectory
        diff_u = np.sqrt(_overlap_l2_sq(ta.times, ta.u, tb.times, tb.u,
                                        lambda d: norms.norm2("u", d)))
        diff_eta = _overlap_linf(ta.times, ta.eta, tb.times, tb.eta,
                                 lambda d: norms.norm2("v", d))
        rows.append({"dt_coarse": dta, "dt_fine": dtb,
                     "diff_u": float(diff_u), "diff_eta": float(diff_eta)})
    return rows
