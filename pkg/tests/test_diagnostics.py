"""Time-shift norms, power-law fits, interpolants, refinement studies."""

import dataclasses

import numpy as np
import pytest

from slipfsi.diagnostics import (
    InterpolantView,
    TrajectoryNorms,
    refinement_study,
    shift_report,
    sqrt_fit,
    time_shift_norm,
)
from slipfsi.driver import Trajectory, build_workspace, run
from slipfsi.errors import DegenerateFit, ShiftTooLarge

from conftest import make_config


@pytest.fixture(scope="module")
def traj_ws(small_run):
    return small_run.trajectory, small_run.workspace


def _synthetic_trajectory(ws, n_steps, dt, rng=None, constant=False):
    traj = Trajectory()
    n = ws.spaces.n_udof
    base = np.zeros(n) if rng is None else rng.standard_normal(n)
    for k in range(n_steps + 1):
        traj.times.append(k * dt)
        if constant or rng is None:
            snap = base.copy()
        else:
            snap = base + 0.1 * rng.standard_normal(n) * np.sqrt(dt)
            base = snap
        traj.u.append(snap)
        zero = np.zeros(ws.grid.ndof)
        traj.eta.append(zero.copy())
        traj.v.append(zero.copy())
        traj.v_star.append(zero.copy())
        traj.p.append(np.zeros(ws.spaces.n_pdof))
    return traj


def test_constant_trajectory_zero_shift_norm(traj_ws):
    _, ws = traj_ws
    traj = _synthetic_trajectory(ws, 20, 1e-3, constant=True)
    norms = TrajectoryNorms(ws)
    for h in (1e-3, 2.5e-3, 7e-3):
        assert time_shift_norm(traj, "u", h, norms) == 0.0


def test_shift_norm_diagonal_identity(traj_ws):
    # at h = dt the squared norm is dt * sum of squared snapshot jumps
    traj, ws = traj_ws
    norms = TrajectoryNorms(ws)
    dt = traj.dt
    val = time_shift_norm(traj, "u", dt, norms)
    # the integral starts at t = h, so the jump into snapshot 1 is excluded
    direct = sum(
        dt * norms.norm2("u", traj.u[n + 1] - traj.u[n])
        for n in range(1, len(traj.u) - 1)
    )
    assert val**2 == pytest.approx(direct, rel=1e-12)


def test_shift_norm_sub_step_scaling(traj_ws):
    # 0 < h < dt: value^2 = (h/dt) * (value at dt)^2
    traj, ws = traj_ws
    norms = TrajectoryNorms(ws)
    dt = traj.dt
    v_dt = time_shift_norm(traj, "u", dt, norms)
    h = 0.3 * dt
    v_h = time_shift_norm(traj, "u", h, norms)
    assert v_h**2 == pytest.approx((h / dt) * v_dt**2, rel=1e-12)


def test_shift_norm_matches_brute_force(traj_ws):
    traj, ws = traj_ws
    norms = TrajectoryNorms(ws)
    dt = traj.dt
    T = traj.duration
    for h in (dt, 2 * dt, 3.7 * dt):
        val = time_shift_norm(traj, "u", h, norms)
        # brute force on a 10x finer grid: exact for piecewise constants
        # when the fine grid resolves every breakpoint
        fine = dt / 10
        total = 0.0
        t = h + fine / 2
        while t < T:
            i = int(np.ceil(t / dt - 1e-12))
            j = int(np.ceil((t - h) / dt - 1e-12))
            total += fine * norms.norm2("u", traj.u[i] - traj.u[max(j, 0)])
            t += fine
        assert val**2 == pytest.approx(total, rel=1e-12, abs=1e-300)


def test_shift_triangle_inequality(traj_ws):
    traj, ws = traj_ws
    norms = TrajectoryNorms(ws)
    dt = traj.dt
    for h1, h2 in ((dt, dt), (dt, 2 * dt), (2 * dt, 3 * dt)):
        a = time_shift_norm(traj, "u", h1, norms)
        b = time_shift_norm(traj, "u", h2, norms)
        c = time_shift_norm(traj, "u", h1 + h2, norms)
        assert c <= a + b + 1e-12


def test_shift_too_large(traj_ws):
    traj, ws = traj_ws
    norms = TrajectoryNorms(ws)
    with pytest.raises(ShiftTooLarge):
        time_shift_norm(traj, "u", traj.duration, norms)


def test_sqrt_fit_exact_power_law():
    h = np.array([1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2])
    c, beta = sqrt_fit(h, 3.0 * np.sqrt(h))
    assert c == pytest.approx(3.0, abs=1e-10)
    assert beta == pytest.approx(0.5, abs=1e-10)


def test_sqrt_fit_degenerate():
    with pytest.raises(DegenerateFit):
        sqrt_fit([1e-3, 2e-3, 4e-3, 8e-3], [0.0, 0.0, 0.0, 0.0])


def test_shift_report_fits_benchmark(traj_ws):
    traj, ws = traj_ws
    dt = traj.dt
    h_list = [dt * k for k in (1, 2, 4, 8)]
    table, fits = shift_report(traj, ws, h_list)
    assert len(table) == 4 * len(h_list)
    for field in ("u", "v", "v_star", "eta_tilde"):
        assert fits[field] is not None
        _, beta = fits[field]
        assert 0.45 <= beta <= 1.6, (field, beta)


def test_interpolant_view_consistency(traj_ws):
    traj, _ = traj_ws
    view = InterpolantView(traj)
    dt = traj.dt
    for n in range(len(traj.times)):
        assert np.array_equal(view.eta(n * dt), traj.eta[n])
    # the interpolant's slope on each open subinterval is the intermediate
    # velocity snapshot (displacement update is exactly eta + dt*v_half)
    for n in range(len(traj.times) - 1):
        t = (n + 0.5) * dt
        slope = view.deta_dt(t)
        assert np.allclose(slope, traj.v_star[n + 1], rtol=0, atol=1e-12)


def test_refinement_single_dt_empty():
    cfg = make_config(t_end=4e-3)
    assert refinement_study(cfg, [1e-3]) == []


def test_refinement_requires_decreasing_dts():
    cfg = make_config(t_end=4e-3)
    with pytest.raises(ValueError):
        refinement_study(cfg, [1e-3, 2e-3])


def test_refinement_mms_first_order():
    from slipfsi.mms import mms_config

    cfg = mms_config(resolution=(8, 8), dt=0.05, t_end=0.2)
    rows = refinement_study(cfg, [0.05, 0.025, 0.0125])
    diffs = [r["diff_u"] for r in rows]
    assert diffs[1] < diffs[0]
    ratio = diffs[0] / diffs[1]
    assert 1.6 <= ratio <= 2.5  # first order in time


def test_refinement_fsi_cauchy_decreasing():
    cfg = make_config(resolution=(8, 8), t_end=1.6e-2)
    rows = refinement_study(cfg, [2e-3, 1e-3, 5e-4])
    diffs_u = [r["diff_u"] for r in rows]
    diffs_eta = [r["diff_eta"] for r in rows]
    assert diffs_u[1] < diffs_u[0]
    assert diffs_eta[1] < diffs_eta[0]
