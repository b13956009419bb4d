"""Command-line interface.

Subcommands: run, shifts, refine, mms, validate-config.  Exit codes:
0 success, 1 usage error, 2 configuration validation error, 3 runtime
failure, 4 run FAILED (a verified identity or bound was breached).
"""

import argparse
import os
import sys
import time

from . import diagnostics, driver, geometry, mms, runio
from .backend import backend_name
from .config import emit_config, parse_config
from .errors import ParseError, SlipFsiError, ValidationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_FAILED = 4


def _build_parser():
    parser = argparse.ArgumentParser(prog="slipfsi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="configuration file path")
        p.add_argument("--out", default=".", help="output directory")

    p_run = sub.add_parser("run", help="run the simulation and write the energy ledger")
    common(p_run)
    p_run.add_argument("--dump-fields", action="store_true", help="write per-step VTK field dumps")

    p_sh = sub.add_parser("shifts", help="time-shift norms of a fresh trajectory")
    common(p_sh)
    p_sh.add_argument("--h-list", default=None, help="comma-separated shifts (default dt*{1,2,4,8,16})")

    p_ref = sub.add_parser("refine", help="Cauchy refinement study over a dt sweep")
    common(p_ref)
    p_ref.add_argument("--dt-list", default=None, help="comma-separated decreasing dts (default: 4 halvings)")

    p_mms = sub.add_parser("mms", help="manufactured-solution convergence on a fixed domain")
    common(p_mms)
    p_mms.add_argument("--dt-list", default="0.04,0.02,0.01", help="comma-separated dts")

    p_val = sub.add_parser("validate-config", help="parse and validate a configuration file")
    p_val.add_argument("--config", required=True)
    return parser


def _parse_floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError("list", "expected comma-separated real numbers") from None


def _run_and_write(config, outdir, dump_fields, config_text):
    t0 = time.perf_counter()
    os.makedirs(outdir, exist_ok=True)
    written = []

    callback = None
    if dump_fields:
        def callback(n, ws, amap, fstate):
            written.append(runio.dump_step_fields(outdir, ws, n, amap, fstate.u))

    result = driver.run(config, callback=callback)
    ws = result.workspace

    ledger_path = os.path.join(outdir, "energy_ledger.csv")
    result.ledger.to_csv(ledger_path)
    written.append(ledger_path)

    summary_path = os.path.join(outdir, "run_summary.json")
    runio.write_summary(summary_path, result.summary)
    written.append(summary_path)

    iface_path = os.path.join(outdir, "interface.csv")
    runio.write_interface_csv(iface_path, result.trajectory, ws.grid, ws.span)
    written.append(iface_path)

    mesh_path = os.path.join(outdir, "mesh.vtk")
    geometry.write_vtk(mesh_path, ws.mesh)
    written.append(mesh_path)

    manifest_path = os.path.join(outdir, "run_manifest.json")
    runio.write_manifest(manifest_path, config_text, written, time.perf_counter() - t0, backend_name())
    return result


def _cmd_run(args):
    config = parse_config(args.config)
    if args.dump_fields:
        config.dump_fields = True
    result = _run_and_write(config, args.out, config.dump_fields, emit_config(config))
    summary = result.summary
    print(f"stop_reason={summary['stop_reason']} stop_step={summary['stop_step']} "
          f"E0={summary['E0']:.6e} E_final={summary['E_final']:.6e}")
    if result.trajectory.stop_reason is driver.StopReason.SOLVER_FAILURE:
        print("\n".join(summary["failures"]), file=sys.stderr)
        return EXIT_RUNTIME
    if summary["failed"]:
        print("\n".join(summary["failures"]), file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def _cmd_shifts(args):
    config = parse_config(args.config)
    result = driver.run(config)
    if result.summary["failed"]:
        print("\n".join(result.summary["failures"]), file=sys.stderr)
        return EXIT_FAILED
    if args.h_list:
        h_list = _parse_floats(args.h_list)
    else:
        duration = result.trajectory.duration
        h_list = [config.dt * k for k in (1, 2, 4, 8, 16) if config.dt * k < duration]
    table, fits = diagnostics.shift_report(result.trajectory, result.workspace, h_list)
    os.makedirs(args.out, exist_ok=True)
    runio.write_shifts_csv(os.path.join(args.out, "shifts.csv"), table)
    for field, fit in fits.items():
        if fit is None:
            print(f"{field}: degenerate (all shift values zero)")
        else:
            print(f"{field}: C={fit[0]:.6e} beta={fit[1]:.4f}")
    return EXIT_OK


def _cmd_refine(args):
    config = parse_config(args.config)
    if args.dt_list:
        dt_list = _parse_floats(args.dt_list)
    else:
        dt_list = [config.dt / 2**k for k in range(5)]
    rows = diagnostics.refinement_study(config, dt_list)
    os.makedirs(args.out, exist_ok=True)
    runio.write_refinement_csv(os.path.join(args.out, "refinement.csv"), rows)
    for r in rows:
        print(f"dt={r['dt_coarse']:.6e} diff_u={r['diff_u']:.6e} diff_eta={r['diff_eta']:.6e}")
    return EXIT_OK


def _cmd_mms(args):
    config = parse_config(args.config)
    dt_list = _parse_floats(args.dt_list)
    rows = mms.mms_study(resolution=config.resolution, dt_list=dt_list)
    os.makedirs(args.out, exist_ok=True)
    runio.write_mms_csv(os.path.join(args.out, "mms.csv"), rows)
    for r in rows:
        order = f" order={r['order']:.3f}" if "order" in r else ""
        print(f"dt={r['dt']:.6e} err_u={r['err_u']:.6e}{order}")
    return EXIT_OK


def _cmd_validate(args):
    parse_config(args.config)
    print("configuration OK")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "shifts": _cmd_shifts,
    "refine": _cmd_refine,
    "mms": _cmd_mms,
    "validate-config": _cmd_validate,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SlipFsiError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
