"""Configuration parsing, emission round-trip, CLI exit codes, outputs."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from slipfsi.cli import main
from slipfsi.config import emit_config, parse_config, parse_config_text
from slipfsi.errors import ParseError, ValidationError
from slipfsi.geometry import FaceTag

MINIMAL = """
[time]
dt = 1e-3
t_end = 5e-3
"""

BENCH = """
[domain]
nx = 6
ny = 6
[structure]
rho_s = 1.0
thickness = 0.1
bending = 0.5
[fluid]
mu = 0.05
alpha = 0.5
[boundary]
eta0 = sine 0.02
[time]
dt = 1e-3
t_end = 5e-3
"""


def test_minimal_config_defaults():
    cfg = parse_config_text(MINIMAL)
    assert cfg.resolution == (16, 16)
    assert cfg.structure.rho_s == 1.0
    assert cfg.fluid.mu == 0.05
    assert cfg.c_omega == 0.5
    assert cfg.j_floor == 1e-3
    assert cfg.boundary.eta0_kind == "zero"
    assert cfg.polygon.face_tags[2] is FaceTag.ELASTIC


def test_negative_dt_rejected():
    with pytest.raises(ValidationError) as exc:
        parse_config_text("[time]\ndt = -0.1\n")
    assert exc.value.key == "dt"


def test_unknown_key_rejected_with_line():
    text = "[fluid]\nmu = 0.1\nviscosity = 0.2\n"
    with pytest.raises(ParseError) as exc:
        parse_config_text(text)
    assert exc.value.line == 3
    assert exc.value.key == "viscosity"


def test_unknown_section_rejected():
    with pytest.raises(ParseError):
        parse_config_text("[solver]\ntype = direct\n")


def test_duplicate_key_rejected():
    with pytest.raises(ParseError):
        parse_config_text("[time]\ndt = 1e-3\ndt = 1e-4\n")


def test_bad_pressure_spec_rejected():
    with pytest.raises(ValidationError):
        parse_config_text("[boundary]\npressure_1 = ramp 3\n")


def test_roundtrip_is_exact():
    cfg = parse_config_text(BENCH)
    text = emit_config(cfg)
    cfg2 = parse_config_text(text)
    assert emit_config(cfg2) == text
    assert cfg2.dt == cfg.dt
    assert cfg2.structure.bending == cfg.structure.bending
    assert np.array_equal(cfg2.polygon.vertices, cfg.polygon.vertices)
    assert cfg2.boundary.eta0_amplitude == cfg.boundary.eta0_amplitude


def test_roundtrip_with_pressures():
    text = BENCH + "\n[boundary]\n" if False else BENCH.replace(
        "eta0 = sine 0.02", "eta0 = sine 0.02\npressure_1 = sine 2 3.5 0.25 1\npressure_3 = constant 7"
    )
    cfg = parse_config_text(text)
    out = emit_config(cfg)
    cfg2 = parse_config_text(out)
    assert cfg2.boundary.pressures[3].value == 7
    p1 = cfg2.boundary.pressures[1]
    assert (p1.amplitude, p1.omega, p1.phase, p1.value) == (2, 3.5, 0.25, 1)
    assert emit_config(cfg2) == out


def _write(tmp_path, text, name="cfg.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_run_success(tmp_path):
    cfg = _write(tmp_path, BENCH)
    out = str(tmp_path / "out")
    assert main(["run", "--config", cfg, "--out", out]) == 0
    for name in ("energy_ledger.csv", "run_summary.json", "interface.csv",
                 "mesh.vtk", "run_manifest.json"):
        assert os.path.exists(os.path.join(out, name)), name
    header = open(os.path.join(out, "energy_ledger.csv")).readline().strip()
    assert header == ("step,t,E_half,E_full,D,gcl_res,struct_res,fluid_margin,"
                      "j_min,inj_margin,div_res,normal_res")
    manifest = json.load(open(os.path.join(out, "run_manifest.json")))
    assert "energy_ledger.csv" in manifest["outputs"]


def test_cli_missing_config_is_usage_error():
    assert main(["run"]) == 1


def test_cli_unknown_subcommand_is_usage_error():
    assert main(["explode", "--config", "x"]) == 1


def test_cli_invalid_config_is_validation_error(tmp_path):
    cfg = _write(tmp_path, "[time]\ndt = -1\n")
    assert main(["run", "--config", cfg]) == 2


def test_cli_nonexistent_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_cli_degeneration_is_success(tmp_path):
    text = BENCH.replace("eta0 = sine 0.02", "eta0 = sine 1.5")
    cfg = _write(tmp_path, text)
    out = str(tmp_path / "out")
    assert main(["run", "--config", cfg, "--out", out]) == 0
    summary = json.load(open(os.path.join(out, "run_summary.json")))
    assert summary["stop_reason"] == "DomainDegenerate"


def test_cli_ledger_byte_identical_across_runs(tmp_path):
    cfg = _write(tmp_path, BENCH)
    outs = []
    for k in (0, 1):
        out = str(tmp_path / f"out{k}")
        assert main(["run", "--config", cfg, "--out", out]) == 0
        outs.append(open(os.path.join(out, "energy_ledger.csv"), "rb").read())
    assert outs[0] == outs[1]


def test_cli_dump_fields(tmp_path):
    cfg = _write(tmp_path, BENCH)
    out = str(tmp_path / "out")
    assert main(["run", "--config", cfg, "--out", out, "--dump-fields"]) == 0
    dumps = [f for f in os.listdir(out) if f.startswith("fields_")]
    assert len(dumps) == 6  # initial state + 5 steps
    first = open(os.path.join(out, "fields_00000.vtk")).readline().strip()
    assert first == "# vtk DataFile Version 3.0"


def test_cli_shifts_and_refine_and_mms(tmp_path):
    cfg = _write(tmp_path, BENCH)
    out = str(tmp_path / "diag")
    assert main(["shifts", "--config", cfg, "--out", out]) == 0
    lines = open(os.path.join(out, "shifts.csv")).read().splitlines()
    assert lines[0] == "field,h,value"
    assert len(lines) > 1

    assert main(["refine", "--config", cfg, "--out", out, "--dt-list", "1e-3,5e-4"]) == 0
    lines = open(os.path.join(out, "refinement.csv")).read().splitlines()
    assert lines[0] == "dt,diff_u,diff_eta"
    assert len(lines) == 2

    assert main(["mms", "--config", cfg, "--out", out, "--dt-list", "0.05,0.025"]) == 0
    lines = open(os.path.join(out, "mms.csv")).read().splitlines()
    assert lines[0] == "dt,err_u"

    assert main(["validate-config", "--config", cfg]) == 0


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "slipfsi.cli", "validate-config", "--config", "/nonexistent"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
