"""Strict key-value configuration files.

Sections: [domain], [structure], [fluid], [boundary], [time], [guards],
[output].  Unknown sections or keys are hard errors: a silently ignored
typo in a physical parameter is the most damaging user mistake this tool
can make.  ``emit_config`` writes the canonical form with every key
spelled out, and parse(emit(cfg)) reproduces the configuration exactly
(floats are emitted with 17 significant digits).
"""

import numpy as np

from .driver import SimConfig
from .errors import ParseError, ValidationError
from .fluid import BoundaryData, FluidParams, PressureProfile
from .geometry import FaceTag, ReferencePolygon, unit_square
from .shell import StructureParams

_TAG_NAMES = {t.value: t for t in FaceTag}

_KEYS = {
    "domain": {"preset", "vertices", "face_tags", "nx", "ny"},
    "structure": {"rho_s", "thickness", "bending", "coercivity_c", "frozen"},
    "fluid": {"rho_f", "mu", "alpha", "alpha_rigid", "convection_jacobian"},
    "boundary": {"eta0", "v0"},  # plus pressure_<face index>
    "time": {"dt", "t_end"},
    "guards": {"c_omega", "j_floor"},
    "output": {"dump_fields"},
}


def _raw_parse(text):
    sections = {name: {} for name in _KEYS}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _KEYS:
                raise ParseError(lineno, name, "unknown section")
            current = name
            continue
        if "=" not in line:
            raise ParseError(lineno, line, "expected key = value")
        if current is None:
            raise ParseError(lineno, line.split("=")[0].strip(), "key outside any section")
        key, value = (part.strip() for part in line.split("=", 1))
        known = key in _KEYS[current] or (current == "boundary" and key.startswith("pressure_"))
        if not known:
            raise ParseError(lineno, key, f"unknown key in [{current}]")
        if key in sections[current]:
            raise ParseError(lineno, key, "duplicate key")
        sections[current][key] = (value, lineno)
    return sections


def _get(sections, section, key, default=None):
    if key in sections[section]:
        return sections[section][key][0]
    return default


def _float(sections, section, key, default, positive=False, key_label=None):
    raw = _get(sections, section, key)
    label = key_label or key
    if raw is None:
        val = default
    else:
        try:
            val = float(raw)
        except ValueError:
            raise ValidationError(label, "must be a real number") from None
    if positive and not val > 0:
        raise ValidationError(label, "must be strictly positive")
    return val


def _int(sections, section, key, default):
    raw = _get(sections, section, key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(key, "must be an integer") from None


def _bool(sections, section, key, default):
    raw = _get(sections, section, key)
    if raw is None:
        return default
    low = raw.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValidationError(key, "must be a boolean")


def _parse_polygon(sections):
    verts_raw = _get(sections, "domain", "vertices")
    tags_raw = _get(sections, "domain", "face_tags")
    preset = _get(sections, "domain", "preset", "unit_square")
    if (verts_raw is None) != (tags_raw is None):
        raise ValidationError("vertices", "vertices and face_tags must be given together")
    if verts_raw is None:
        if preset != "unit_square":
            raise ValidationError("preset", "unknown preset (only unit_square is built in)")
        return unit_square()
    try:
        verts = [[float(x) for x in pair.split(",")] for pair in verts_raw.split(";") if pair.strip()]
    except ValueError:
        raise ValidationError("vertices", "expected 'x,y; x,y; ...'") from None
    if any(len(v) != 2 for v in verts):
        raise ValidationError("vertices", "each vertex needs exactly two coordinates")
    tags = []
    for name in tags_raw.split(","):
        name = name.strip()
        if name not in _TAG_NAMES:
            raise ValidationError("face_tags", f"unknown tag {name!r} (choose from {sorted(_TAG_NAMES)})")
        tags.append(_TAG_NAMES[name])
    try:
        return ReferencePolygon(np.array(verts, dtype=float), tuple(tags))
    except Exception as exc:
        raise ValidationError("vertices", str(exc)) from None


def _parse_bending(sections):
    raw = _get(sections, "structure", "bending", "1")
    try:
        parts = [float(x) for x in raw.split(",")]
    except ValueError:
        raise ValidationError("bending", "must be one or two real numbers") from None
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2 or any(b <= 0 for b in parts):
        raise ValidationError("bending", "must be one or two strictly positive numbers")
    return tuple(parts)


def _parse_initial(sections, key):
    raw = _get(sections, "boundary", key, "zero")
    parts = raw.split()
    if parts[0] == "zero":
        return "zero", 0.0
    if parts[0] == "sine" and len(parts) == 2:
        try:
            return "sine_normal", float(parts[1])
        except ValueError:
            pass
    raise ValidationError(key, "expected 'zero' or 'sine AMPLITUDE'")


def _parse_pressures(sections):
    out = {}
    for key, (raw, lineno) in sections["boundary"].items():
        if not key.startswith("pressure_"):
            continue
        try:
            face = int(key.split("_", 1)[1])
        except ValueError:
            raise ParseError(lineno, key, "face index must be an integer") from None
        parts = raw.split()
        try:
            if parts[0] == "constant" and len(parts) == 2:
                out[face] = PressureProfile("constant", float(parts[1]))
                continue
            if parts[0] == "sine" and 3 <= len(parts) <= 5:
                amp, omega = float(parts[1]), float(parts[2])
                phase = float(parts[3]) if len(parts) > 3 else 0.0
                offset = float(parts[4]) if len(parts) > 4 else 0.0
                out[face] = PressureProfile("sine", offset, amp, omega, phase)
                continue
        except ValueError:
            pass
        raise ValidationError(key, "expected 'constant VALUE' or 'sine AMP OMEGA [PHASE] [OFFSET]'")
    return out


def parse_config_text(text):
    sections = _raw_parse(text)

    polygon = _parse_polygon(sections)
    nx = _int(sections, "domain", "nx", 16)
    ny = _int(sections, "domain", "ny", 16)

    structure = StructureParams(
        rho_s=_float(sections, "structure", "rho_s", 1.0, positive=True),
        h=_float(sections, "structure", "thickness", 0.1, positive=True),
        bending=_parse_bending(sections),
        coercivity_c=(
            _float(sections, "structure", "coercivity_c", None, positive=True)
            if _get(sections, "structure", "coercivity_c") is not None
            else None
        ),
    )
    conv_j = _get(sections, "fluid", "convection_jacobian", "new")
    if conv_j not in ("new", "old"):
        raise ValidationError("convection_jacobian", "must be 'new' or 'old'")
    fl = FluidParams(
        rho_f=_float(sections, "fluid", "rho_f", 1.0, positive=True),
        mu=_float(sections, "fluid", "mu", 0.05, positive=True),
        alpha=_float(sections, "fluid", "alpha", 1.0, positive=True),
        alpha_rigid=_float(sections, "fluid", "alpha_rigid", 1.0, positive=True),
        convection_jacobian=conv_j,
    )
    eta0_kind, eta0_amp = _parse_initial(sections, "eta0")
    v0_kind, v0_amp = _parse_initial(sections, "v0")
    boundary = BoundaryData(
        pressures=_parse_pressures(sections),
        eta0_kind=eta0_kind,
        eta0_amplitude=eta0_amp,
        v0_kind=v0_kind,
        v0_amplitude=v0_amp,
    )

    dt = _float(sections, "time", "dt", 1e-3, key_label="dt")
    if dt <= 0:
        raise ValidationError("dt", "must be strictly positive")
    t_end = _float(sections, "time", "t_end", 0.1)
    if t_end < 0:
        raise ValidationError("t_end", "cannot be negative")

    return SimConfig(
        polygon=polygon,
        resolution=(nx, ny),
        structure=structure,
        fluid=fl,
        boundary=boundary,
        dt=dt,
        t_end=t_end,
        c_omega=_float(sections, "guards", "c_omega", 0.5, positive=True),
        j_floor=_float(sections, "guards", "j_floor", 1e-3, positive=True),
        frozen_structure=_bool(sections, "structure", "frozen", False),
        dump_fields=_bool(sections, "output", "dump_fields", False),
    )


def parse_config(path):
    """Parse and validate a configuration file into a SimConfig."""
    with open(path) as fh:
        return parse_config_text(fh.read())


def _fmt(x):
    return f"{x:.17g}"


def emit_config(config):
    """Canonical text form; parse_config_text(emit_config(c)) == c structurally."""
    poly = config.polygon
    verts = "; ".join(f"{_fmt(v[0])},{_fmt(v[1])}" for v in poly.vertices)
    tags = ", ".join(t.value for t in poly.face_tags)
    lines = [
        "[domain]",
        f"vertices = {verts}",
        f"face_tags = {tags}",
        f"nx = {config.resolution[0]}",
        f"ny = {config.resolution[1]}",
        "",
        "[structure]",
        f"rho_s = {_fmt(config.structure.rho_s)}",
        f"thickness = {_fmt(config.structure.h)}",
        f"bending = {_fmt(config.structure.bending[0])}, {_fmt(config.structure.bending[1])}",
        f"coercivity_c = {_fmt(config.structure.coercivity_c)}",
        f"frozen = {str(config.frozen_structure).lower()}",
        "",
        "[fluid]",
        f"rho_f = {_fmt(config.fluid.rho_f)}",
        f"mu = {_fmt(config.fluid.mu)}",
        f"alpha = {_fmt(config.fluid.alpha)}",
        f"alpha_rigid = {_fmt(float(config.fluid.alpha_rigid))}",
        f"convection_jacobian = {config.fluid.convection_jacobian}",
        "",
        "[boundary]",
        _emit_initial("eta0", config.boundary.eta0_kind, config.boundary.eta0_amplitude),
        _emit_initial("v0", config.boundary.v0_kind, config.boundary.v0_amplitude),
    ]
    for face in sorted(config.boundary.pressures):
        prof = config.boundary.pressures[face]
        if prof.kind == "constant":
            lines.append(f"pressure_{face} = constant {_fmt(prof.value)}")
        elif prof.kind == "sine":
            lines.append(
                f"pressure_{face} = sine {_fmt(prof.amplitude)} {_fmt(prof.omega)} "
                f"{_fmt(prof.phase)} {_fmt(prof.value)}"
            )
        else:
            raise ValidationError(f"pressure_{face}", "callable profiles cannot be written to a file")
    lines += [
        "",
        "[time]",
        f"dt = {_fmt(config.dt)}",
        f"t_end = {_fmt(config.t_end)}",
        "",
        "[guards]",
        f"c_omega = {_fmt(config.c_omega)}",
        f"j_floor = {_fmt(config.j_floor)}",
        "",
        "[output]",
        f"dump_fields = {str(config.dump_fields).lower()}",
        "",
    ]
    return "\n".join(lines)


def _emit_initial(key, kind, amp):
    if kind == "zero" or amp == 0.0:
        return f"{key} = zero"
    return f"{key} = sine {_fmt(amp)}"
