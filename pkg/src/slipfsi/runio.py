"""File emission: CSV outputs, summaries, manifests, VTK field dumps.

All CSV files carry a header row and full-precision (17 significant
digit) decimal fields, and repeated identical runs produce byte-identical
output.
"""

import hashlib
import json
import os

import numpy as np

from . import __version__, geometry


def _fmt(x):
    return f"{float(x):.17g}"


def write_summary(path, summary):
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def write_interface_csv(path, traj, grid, span):
    """Deformed interface node positions per stored step."""
    x0, _, ylev = span
    n = grid.n_nodes
    nc = grid.ndof_comp
    idx = 2 * np.arange(n)
    with open(path, "w") as fh:
        fh.write("step,t,z,phi_x,phi_y\n")
        for k, t in enumerate(traj.times):
            eta = traj.eta[k]
            px = x0 + grid.z + eta[idx]
            py = ylev + eta[nc + idx]
            for i in range(n):
                fh.write(f"{k},{_fmt(t)},{_fmt(grid.z[i])},{_fmt(px[i])},{_fmt(py[i])}\n")


def write_shifts_csv(path, table):
    with open(path, "w") as fh:
        fh.write("field,h,value\n")
        for field, h, value in table:
            fh.write(f"{field},{_fmt(h)},{_fmt(value)}\n")


def write_refinement_csv(path, rows):
    with open(path, "w") as fh:
        fh.write("dt,diff_u,diff_eta\n")
        for r in rows:
            fh.write(f"{_fmt(r['dt_coarse'])},{_fmt(r['diff_u'])},{_fmt(r['diff_eta'])}\n")


def write_mms_csv(path, rows):
    with open(path, "w") as fh:
        fh.write("dt,err_u\n")
        for r in rows:
            fh.write(f"{_fmt(r['dt'])},{_fmt(r['err_u'])}\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, config_text, out_files, wall_clock, backend):
    """Run manifest: resolved config echo, version, and output checksums."""
    manifest = {
        "version": __version__,
        "backend": backend,
        "wall_clock_seconds": wall_clock,
        "config": config_text,
        "outputs": {
            os.path.basename(p): {"path": p, "sha256": _sha256(p)}
            for p in sorted(out_files)
            if os.path.exists(p)
        },
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def dump_step_fields(outdir, ws, step, amap, u):
    """Per-step VTK dump of the extension displacement, Jacobian, velocity."""
    mesh = ws.mesh
    j_cell = amap.J.mean(axis=1)
    # velocity restricted to the mesh (corner) nodes of the refined lattice
    nx, ny = mesh.nx, mesh.ny
    ii, jj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="xy")
    vidx = (2 * jj.ravel()) * (2 * nx + 1) + 2 * ii.ravel()
    u_nodes = u.reshape(-1, 2)[vidx]
    path = os.path.join(outdir, f"fields_{step:05d}.vtk")
    geometry.write_vtk(
        path, mesh,
        point_data={"extension": amap.B, "velocity": u_nodes},
        cell_data={"jacobian": j_cell},
    )
    return path
