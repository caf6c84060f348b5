"""Command-line front end: declarative configs, experiment dispatch, CSV + manifest output.

Configs are YAML mappings with a strict schema per subcommand: unknown keys
are rejected (with a spelling suggestion), out-of-range values are rejected
with the field named.  Command-line flags override file values.  Every run
writes a manifest echoing the fully resolved config, so a manifest can be
re-ingested as a config to reproduce the run.
"""

from __future__ import annotations

import argparse
import difflib
import math
import sys
import time
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import problem as pb
from .dynamics import IntegratorConfig, integrate
from .errors import ConfigurationError, NumericalError, OpenAQSError
from .experiments import (SweepSpec, default_time_grid, format_float,
                          gap_spectral_map, golden_rule_profile, make_bath,
                          sweep_detuning, sweep_total_time, t_lin,
                          two_level_run, write_gnuplot_script)
from .rates import RateMode

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _code_version() -> str:
    try:
        return version("openaqs")
    except PackageNotFoundError:
        return "unknown"


# --------------------------------------------------------------------------
# config schema

@dataclass(frozen=True)
class Field:
    name: str
    ftype: str                      # int | float | str | bool | floats
    default: Any = None
    check: Callable[[Any], bool] | None = None
    legal: str = ""
    help: str = ""


def _positive(x):
    return x > 0


def _nonnegative(x):
    return x >= 0


_COMMON = [
    Field("output", "str", default="runs", help="output directory"),
    Field("workers", "int", default=None, check=_positive, legal="positive integer",
          help="parallel sweep workers (default: all cores)"),
    Field("h", "float", default=None, check=_positive, legal="> 0",
          help="integrator step override"),
    Field("tail_tol", "float", default=1e-6, check=_nonnegative, legal=">= 0"),
    Field("gnuplot", "bool", default=False, help="emit a companion gnuplot script"),
]

_PROBLEM = [
    Field("n", "int", default=10, check=lambda x: 1 <= x <= 30, legal="1..30",
          help="qubit count (database size 2^n)"),
    Field("schedule", "str", default="linear",
          check=lambda x: x in ("linear", "optimal"), legal="linear|optimal"),
]

_THERMAL = [
    Field("omega_c", "float", default=0.25, check=_positive, legal="> 0"),
    Field("beta", "float", default=math.inf, check=_positive, legal="> 0 (or inf)"),
]

_STRUCTURED = [
    Field("omega0", "float", default=0.25, check=_positive, legal="> 0"),
    Field("deltaL", "float", default=0.2),
    Field("phase_sign", "int", default=1, check=lambda x: x in (1, -1), legal="1|-1"),
]

_MODES = Field("modes", "strs", default=["complex"],
               check=lambda xs: all(x in ("complex", "real_only") for x in xs),
               legal="complex|real_only")
_ETAS = Field("etas", "floats", default=[0.05],
              check=lambda xs: all(x >= 0 for x in xs), legal="each >= 0")

SCHEMAS: dict[str, list[Field]] = {
    "simulate": _COMMON + _PROBLEM + _THERMAL + _STRUCTURED + [
        Field("T", "float", default=100.0, check=_positive, legal="> 0"),
        Field("bath", "str", default="none",
              check=lambda x: x in ("none", "thermal", "structured"),
              legal="none|thermal|structured"),
        Field("eta", "float", default=0.0, check=_nonnegative, legal=">= 0"),
        Field("mode", "str", default="complex",
              check=lambda x: x in ("complex", "real_only"), legal="complex|real_only"),
        Field("a0", "float", default=None, check=lambda x: 0 < x < 1, legal="(0, 1)",
              help="use a single-site two-level problem instead of Grover"),
    ],
    "sweep-time": _COMMON + _PROBLEM + _THERMAL + _STRUCTURED + [
        Field("bath", "str", default="thermal",
              check=lambda x: x in ("thermal", "structured"), legal="thermal|structured"),
        _ETAS, _MODES,
        Field("t_max_factor", "float", default=0.8, check=_positive, legal="> 0",
              help="T_max as a multiple of T_lin = 4N/pi"),
        Field("t_max", "float", default=None, check=_positive, legal="> 0",
              help="absolute T_max (overrides t_max_factor)"),
        Field("points", "int", default=12, check=_positive, legal="positive integer"),
    ],
    "sweep-detuning": _COMMON + _PROBLEM + [
        Field("omega0", "float", default=0.25, check=_positive, legal="> 0"),
        Field("phase_sign", "int", default=1, check=lambda x: x in (1, -1), legal="1|-1"),
        _ETAS, _MODES,
        Field("T", "float", default=None, check=_positive, legal="> 0",
              help="fixed total time (default 0.8 T_lin)"),
        Field("deltaL_min", "float", default=0.03),
        Field("deltaL_max", "float", default=0.6),
        Field("deltaL_points", "int", default=23, check=lambda x: x >= 2, legal=">= 2"),
    ],
    "two-level": _COMMON + [
        Field("a0", "float", default=math.sqrt(0.5), check=lambda x: 0 < x < 1,
              legal="(0, 1)"),
        Field("omega0", "float", default=0.5, check=_positive, legal="> 0"),
        Field("deltaL", "float", default=0.5),
        Field("phase_sign", "int", default=1, check=lambda x: x in (1, -1), legal="1|-1"),
        Field("etas", "floats", default=[0.01, 0.05, 0.2],
              check=lambda xs: all(x >= 0 for x in xs), legal="each >= 0"),
        _MODES,
        Field("t_max", "float", default=10.0, check=_positive, legal="> 0"),
        Field("points", "int", default=10, check=_positive, legal="positive integer"),
    ],
    "gapmap": _COMMON + _PROBLEM + _THERMAL + _STRUCTURED + [
        Field("bath", "str", default="structured",
              check=lambda x: x in ("thermal", "structured"), legal="thermal|structured"),
        Field("eta", "float", default=0.05, check=_nonnegative, legal=">= 0"),
        Field("a0", "float", default=None, check=lambda x: 0 < x < 1, legal="(0, 1)"),
        Field("s_points", "int", default=101, check=lambda x: x >= 2, legal=">= 2"),
        Field("omega_max", "float", default=1.2, check=_positive, legal="> 0"),
        Field("omega_points", "int", default=121, check=lambda x: x >= 2, legal=">= 2"),
    ],
    "golden-rule": _COMMON + _PROBLEM + _THERMAL + _STRUCTURED + [
        Field("bath", "str", default="structured",
              check=lambda x: x in ("thermal", "structured"), legal="thermal|structured"),
        Field("eta", "float", default=0.05, check=_nonnegative, legal=">= 0"),
        Field("a0", "float", default=None, check=lambda x: 0 < x < 1, legal="(0, 1)"),
        Field("s_points", "int", default=101, check=lambda x: x >= 2, legal=">= 2"),
    ],
    "calibrate-schedule": _COMMON + [
        Field("n", "int", default=10, check=lambda x: 1 <= x <= 30, legal="1..30"),
        Field("target", "float", default=0.55),
        Field("tolerance", "float", default=0.10, check=_positive, legal="> 0"),
    ],
}


def _coerce(field: Field, raw):
    try:
        if raw is None:
            return None
        if field.ftype == "int":
            if isinstance(raw, bool) or (isinstance(raw, float) and not raw.is_integer()):
                raise ValueError
            return int(raw)
        if field.ftype == "float":
            if isinstance(raw, str) and raw.lower() in ("inf", "infinity"):
                return math.inf
            return float(raw)
        if field.ftype == "bool":
            if isinstance(raw, bool):
                return raw
            if isinstance(raw, str):
                return raw.lower() in ("1", "true", "yes")
            raise ValueError
        if field.ftype == "str":
            return str(raw)
        if field.ftype in ("floats", "strs"):
            if isinstance(raw, str):
                raw = [x for x in raw.split(",") if x]
            if not isinstance(raw, (list, tuple)):
                raise ValueError
            cast = float if field.ftype == "floats" else str
            return [cast(x) for x in raw]
        raise ValueError(f"unhandled field type {field.ftype}")
    except (TypeError, ValueError):
        raise ConfigurationError(
            f"field '{field.name}': cannot interpret {raw!r} as {field.ftype}")


def parse_config(subcommand: str, file_values: dict, flag_values: dict) -> dict:
    """Merge file values and flag overrides against the subcommand schema."""
    schema = {f.name: f for f in SCHEMAS[subcommand]}
    for source in (file_values, flag_values):
        for key in source:
            if key in ("subcommand",):
                continue
            if key not in schema:
                hint = difflib.get_close_matches(key, schema, n=1)
                suggestion = f"; did you mean '{hint[0]}'?" if hint else ""
                raise ConfigurationError(f"unknown config key '{key}'{suggestion}")
    resolved = {}
    for name, field in schema.items():
        raw = flag_values.get(name, file_values.get(name, field.default))
        value = _coerce(field, raw) if raw is not None else None
        if value is not None and field.check is not None and not _passes(field, value):
            raise ConfigurationError(
                f"field '{name}' out of range: got {value!r}, legal: {field.legal}")
        resolved[name] = value
    return resolved


def _passes(field: Field, value) -> bool:
    try:
        return bool(field.check(value))
    except TypeError:
        return False


def load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse config file {path}: {exc}")
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must be a mapping")
    if "config" in data and isinstance(data["config"], dict):
        data = dict(data["config"], **{k: v for k, v in data.items()
                                       if k == "subcommand"})
    return data


# --------------------------------------------------------------------------
# dispatch

def _problem_from(cfg: dict) -> pb.AdiabaticProblem:
    if cfg.get("a0") is not None:
        return pb.make_single_site(cfg["a0"])
    return pb.make_grover(cfg["n"])


def _bath_params(cfg: dict, kind: str) -> tuple:
    if kind == "thermal":
        return tuple(sorted({"omega_c": cfg["omega_c"], "beta": cfg["beta"]}.items()))
    return tuple(sorted({"omega0": cfg["omega0"], "deltaL": cfg.get("deltaL", 0.0),
                         "phase_sign": cfg.get("phase_sign", 1)}.items()))


def _modes(cfg: dict) -> tuple:
    return tuple(RateMode(m) for m in cfg["modes"])


def _write_manifest(outdir: Path, subcommand: str, cfg: dict, started: float,
                    findings: dict | None = None) -> None:
    doc = {
        "subcommand": subcommand,
        "config": {k: _yaml_safe(v) for k, v in cfg.items()},
        "code_version": _code_version(),
        "wall_time_s": time.time() - started,
    }
    if findings:
        doc["findings"] = {k: _yaml_safe(v) for k, v in findings.items()}
    with open(outdir / "manifest.yaml", "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=True)


def _yaml_safe(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, tuple):
        return list(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def cmd_simulate(cfg: dict, outdir: Path) -> dict:
    problem = _problem_from(cfg)
    schedule = pb.make_schedule(cfg["schedule"] if cfg.get("a0") is None else pb.LINEAR,
                                cfg["T"], problem)
    bath = None
    if cfg["bath"] != "none" and cfg["eta"] > 0.0:
        bath = make_bath(cfg["bath"], cfg["eta"], dict(_bath_params(cfg, cfg["bath"])))
    config = IntegratorConfig(h=cfg["h"], tail_tol=cfg["tail_tol"])
    traj = integrate(problem, schedule, bath=bath, mode=RateMode(cfg["mode"]),
                     config=config)
    traj.write_csv(outdir / "trajectory.csv")
    return {"final_p0": float(traj.final_success)}


def cmd_sweep_time(cfg: dict, outdir: Path) -> dict:
    problem = pb.make_grover(cfg["n"])
    t_max = cfg["t_max"] or cfg["t_max_factor"] * t_lin(problem.N)
    spec = SweepSpec(
        problem=problem, schedule_kind=cfg["schedule"], bath_kind=cfg["bath"],
        bath_params=_bath_params(cfg, cfg["bath"]), etas=tuple(cfg["etas"]),
        modes=_modes(cfg), T_values=default_time_grid(t_max, cfg["points"]),
        h=cfg["h"], tail_tol=cfg["tail_tol"],
    )
    result = sweep_total_time(spec, workers=cfg["workers"] or 1)
    result.metadata["T_max"] = t_max
    result.write_csv(outdir / "sweep_time.csv")
    if cfg["gnuplot"]:
        write_gnuplot_script(outdir / "sweep_time.gp", "sweep_time.csv",
                             "T", "success vs total time")
    return {"rows": len(result.rows), "T_max": t_max}


def cmd_sweep_detuning(cfg: dict, outdir: Path) -> dict:
    problem = pb.make_grover(cfg["n"])
    T = cfg["T"] or 0.8 * t_lin(problem.N)
    if cfg["deltaL_max"] <= cfg["deltaL_min"]:
        raise ConfigurationError("field 'deltaL_max' must exceed deltaL_min")
    dls = tuple(np.linspace(cfg["deltaL_min"], cfg["deltaL_max"], cfg["deltaL_points"]))
    spec = SweepSpec(
        problem=problem, schedule_kind=cfg["schedule"], bath_kind="structured",
        bath_params=(("omega0", cfg["omega0"]), ("phase_sign", cfg["phase_sign"])),
        etas=tuple(cfg["etas"]), modes=_modes(cfg), deltaL_values=dls, T_fixed=T,
        h=cfg["h"], tail_tol=cfg["tail_tol"],
    )
    result = sweep_detuning(spec, workers=cfg["workers"] or 1)
    result.write_csv(outdir / "sweep_detuning.csv")
    if cfg["gnuplot"]:
        write_gnuplot_script(outdir / "sweep_detuning.gp", "sweep_detuning.csv",
                             "Delta_L", "success vs detuning")
    return {"rows": len(result.rows), "T": T}


def cmd_two_level(cfg: dict, outdir: Path) -> dict:
    problem = pb.make_single_site(cfg["a0"])
    spec = SweepSpec(
        problem=problem, schedule_kind=pb.LINEAR, bath_kind="structured",
        bath_params=(("deltaL", cfg["deltaL"]), ("omega0", cfg["omega0"]),
                     ("phase_sign", cfg["phase_sign"])),
        etas=tuple(cfg["etas"]), modes=_modes(cfg),
        T_values=tuple(np.linspace(cfg["t_max"] / cfg["points"], cfg["t_max"],
                                   cfg["points"])),
        h=cfg["h"], tail_tol=cfg["tail_tol"],
    )
    result = two_level_run(spec, workers=cfg["workers"] or 1)
    result.write_csv(outdir / "two_level.csv")
    return {"rows": len(result.rows)}


def cmd_gapmap(cfg: dict, outdir: Path) -> dict:
    problem = _problem_from(cfg)
    bath = make_bath(cfg["bath"], cfg["eta"], dict(_bath_params(cfg, cfg["bath"])))
    s_vals = np.linspace(0.0, 1.0, cfg["s_points"])
    w_vals = np.linspace(0.0, cfg["omega_max"], cfg["omega_points"])[1:]
    result = gap_spectral_map(problem, bath, s_vals, w_vals)
    result.write_csv(outdir / "gapmap.csv")
    return {"rows": len(result.rows)}


def cmd_golden_rule(cfg: dict, outdir: Path) -> dict:
    problem = _problem_from(cfg)
    bath = make_bath(cfg["bath"], cfg["eta"], dict(_bath_params(cfg, cfg["bath"])))
    s_vals = np.linspace(0.0, 1.0, cfg["s_points"])
    result = golden_rule_profile(problem, bath, s_vals)
    result.write_csv(outdir / "golden_rule.csv")
    return {"rows": len(result.rows)}


def cmd_calibrate_schedule(cfg: dict, outdir: Path) -> dict:
    """Identify which schedule reaches the target closed success at T = 4N/pi."""
    problem = pb.make_grover(cfg["n"])
    T = t_lin(problem.N)
    results = {}
    for kind in (pb.LINEAR, pb.OPTIMAL):
        schedule = pb.make_schedule(kind, T, problem)
        traj = integrate(problem, schedule,
                         config=IntegratorConfig(h=cfg["h"], tail_tol=cfg["tail_tol"]))
        results[kind] = float(traj.final_success)
    target, tol = cfg["target"], cfg["tolerance"]
    matching = [k for k, v in results.items() if abs(v - target) <= tol]
    identified = min(matching, key=lambda k: abs(results[k] - target)) if matching \
        else None
    with open(outdir / "calibration.csv", "w") as fh:
        fh.write("schedule,T,final_p0\n")
        for kind, v in sorted(results.items()):
            fh.write(f"{kind},{format_float(T)},{format_float(v)}\n")
    return {
        "T": T, "target": target,
        "success_linear": results[pb.LINEAR],
        "success_optimal": results[pb.OPTIMAL],
        "identified_schedule": identified or "none",
    }


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep-time": cmd_sweep_time,
    "sweep-detuning": cmd_sweep_detuning,
    "two-level": cmd_two_level,
    "gapmap": cmd_gapmap,
    "golden-rule": cmd_golden_rule,
    "calibrate-schedule": cmd_calibrate_schedule,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="openaqs",
        description="Open-system adiabatic quantum search simulator "
                    "(dimensionless units, hbar = 1)")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, fields in SCHEMAS.items():
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", default=None,
                       help="YAML config file (or a previous run's manifest)")
        for f in fields:
            default_note = f" (default: {f.default})" if f.default is not None else ""
            p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=None,
                           metavar=f.ftype.upper(),
                           help=(f.help or f.legal or f.name) + default_note)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        file_values = load_config_file(args.config) if args.config else {}
        if "subcommand" in file_values and file_values["subcommand"] != args.subcommand:
            raise ConfigurationError(
                f"config file is for subcommand '{file_values['subcommand']}', "
                f"not '{args.subcommand}'")
        flag_values = {f.name: getattr(args, f.name)
                       for f in SCHEMAS[args.subcommand]
                       if getattr(args, f.name, None) is not None}
        cfg = parse_config(args.subcommand, file_values, flag_values)
        outdir = Path(cfg["output"])
        outdir.mkdir(parents=True, exist_ok=True)
        findings = COMMANDS[args.subcommand](cfg, outdir)
        _write_manifest(outdir, args.subcommand, cfg, started, findings)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OpenAQSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for key, value in sorted(findings.items()):
        print(f"{key}: {value}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
