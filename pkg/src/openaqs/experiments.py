"""Reproducible parameter sweeps over the open-system simulations.

Each sweep integrates a family of runs (grid axis x coupling x rate mode),
always including the closed-system baseline, and collects one row per run
into a :class:`SweepResult` that serializes deterministically to CSV.
Numerical failures of individual runs are recorded in their row rather
than aborting the sweep.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import problem as pb
from .baths import (Bath, OhmicBath, StructuredBath, J_structured, J_thermal,
                    build_correlation_grid)
from .dynamics import IntegratorConfig, integrate
from .errors import ConfigurationError, NumericalError
from .rates import RateMode

CLOSED_LABEL = "closed"


def t_lin(N: int) -> float:
    """Reference linear-schedule time 4N/pi used to normalize sweep axes."""
    return 4.0 * N / math.pi


def default_time_grid(t_max: float, points: int = 12) -> tuple[float, ...]:
    """Log-ish spaced total times up to t_max."""
    return tuple(np.geomspace(0.05 * t_max, t_max, points))


def format_float(x) -> str:
    """17 significant digits: round-trip exact for doubles, stable across runs."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SweepSpec:
    problem: pb.AdiabaticProblem
    schedule_kind: str = pb.LINEAR
    bath_kind: str | None = None          # "thermal" | "structured" | None
    bath_params: tuple = ()               # sorted (key, value) pairs
    etas: tuple = ()
    modes: tuple = (RateMode.COMPLEX,)
    T_values: tuple = ()
    deltaL_values: tuple | None = None
    T_fixed: float | None = None
    h: float | None = None
    tail_tol: float = 1e-6

    def bath_dict(self) -> dict:
        return dict(self.bath_params)


@dataclass
class SweepResult:
    columns: list[str]
    rows: list[dict]
    metadata: dict = field(default_factory=dict)

    def column(self, name: str, **filters) -> np.ndarray:
        vals = [r[name] for r in self.rows
                if all(r.get(k) == v for k, v in filters.items())]
        return np.asarray(vals)

    def select(self, **filters) -> list[dict]:
        return [r for r in self.rows
                if all(r.get(k) == v for k, v in filters.items())]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            for key in sorted(self.metadata):
                fh.write(f"# {key}={self.metadata[key]}\n")
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                cells = []
                for col in self.columns:
                    v = row.get(col, "")
                    cells.append(v if isinstance(v, str) else format_float(v))
                fh.write(",".join(cells) + "\n")


def make_bath(kind: str, eta: float, params: dict) -> Bath:
    if kind == "thermal":
        return OhmicBath(eta=eta, omega_c=params["omega_c"],
                         s_exp=params.get("s_exp", 1.0),
                         beta=params.get("beta", math.inf))
    if kind == "structured":
        return StructuredBath(eta=eta, omega0=params["omega0"],
                              deltaL=params["deltaL"],
                              phase_sign=params.get("phase_sign", +1))
    raise ConfigurationError(f"unknown bath kind {kind!r}")


# --------------------------------------------------------------------------
# single sweep point (top-level so it can run in a worker process)

def run_point(payload) -> dict:
    spec, T, eta, mode, deltaL, grid = payload
    problem = spec.problem
    schedule = pb.make_schedule(spec.schedule_kind, T, problem)
    config = IntegratorConfig(h=spec.h, tail_tol=spec.tail_tol)
    row = {
        "T": T,
        "eta": eta,
        "mode": CLOSED_LABEL if eta == 0.0 else mode.value,
    }
    if deltaL is not None:
        row["deltaL"] = deltaL
    try:
        if eta == 0.0:
            traj = integrate(problem, schedule, config=config)
        else:
            params = spec.bath_dict()
            if deltaL is not None:
                params = dict(params, deltaL=deltaL)
            bath = make_bath(spec.bath_kind, eta, params)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")  # flags are recorded per-row
                traj = integrate(problem, schedule, bath=bath, mode=mode,
                                 config=config, grid=grid)
        row.update(
            final_p0=traj.final_success,
            max_bloch_norm_sq=traj.metadata.get("max_bloch_norm_sq", 1.0),
            physicality_flag=traj.metadata.get("physicality_flag", False),
            max_slow_gap_ratio=traj.metadata.get("max_slow_gap_ratio", 0.0),
            error="",
        )
    except NumericalError as exc:
        row.update(final_p0=math.nan, max_bloch_norm_sq=math.nan,
                   physicality_flag=True, max_slow_gap_ratio=math.nan,
                   error=str(exc).replace(",", ";"))
    return row


def _run_all(payloads, workers: int | None) -> list[dict]:
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(payloads) <= 1:
        return [run_point(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_point, payloads))


def _grid_for(spec: SweepSpec, eta: float, deltaL, horizon: float):
    """Pre-build the correlation grid in the parent so workers reuse it."""
    if eta == 0.0 or spec.bath_kind is None:
        return None
    params = spec.bath_dict()
    if deltaL is not None:
        params = dict(params, deltaL=deltaL)
    bath = make_bath(spec.bath_kind, eta, params)
    h = spec.h if spec.h is not None else min(0.1, horizon / 1000.0)
    return build_correlation_grid(bath, horizon + h, h / 2.0, tail_tol=spec.tail_tol)


SWEEP_COLUMNS = ["T", "eta", "mode", "final_p0", "max_bloch_norm_sq",
                 "physicality_flag", "max_slow_gap_ratio", "error"]


def sweep_total_time(spec: SweepSpec, workers: int | None = 1) -> SweepResult:
    """Final success probability vs total evolution time, per (eta, mode)."""
    if not spec.T_values:
        raise ConfigurationError("sweep_total_time requires a nonempty T grid")
    _check_grid(spec.T_values, "T_values")
    payloads = []
    for T in spec.T_values:
        payloads.append((spec, T, 0.0, None, None, None))
        for mode in spec.modes:
            for eta in spec.etas:
                grid = _grid_for(spec, eta, None, T)
                payloads.append((spec, T, eta, mode, None, grid))
    rows = _run_all(payloads, workers)
    rows.sort(key=lambda r: (r["T"], r["eta"], r["mode"]))
    return SweepResult(columns=SWEEP_COLUMNS, rows=rows,
                       metadata=_spec_metadata(spec, sweep="total_time"))


def sweep_detuning(spec: SweepSpec, workers: int | None = 1) -> SweepResult:
    """Final success probability vs band-edge detuning at fixed total time."""
    if spec.bath_kind != "structured":
        raise ConfigurationError("detuning sweeps require a structured bath")
    if not spec.deltaL_values:
        raise ConfigurationError("sweep_detuning requires a nonempty deltaL grid")
    _check_grid(spec.deltaL_values, "deltaL_values")
    if spec.T_fixed is None:
        raise ConfigurationError("sweep_detuning requires T_fixed")
    T = spec.T_fixed
    payloads = [(spec, T, 0.0, None, None, None)]
    for dL in spec.deltaL_values:
        for mode in spec.modes:
            for eta in spec.etas:
                grid = _grid_for(spec, eta, dL, T)
                payloads.append((spec, T, eta, mode, dL, grid))
    rows = _run_all(payloads, workers)
    rows.sort(key=lambda r: (r.get("deltaL", -math.inf), r["eta"], r["mode"]))
    cols = ["deltaL"] + SWEEP_COLUMNS
    return SweepResult(columns=cols, rows=rows,
                       metadata=_spec_metadata(spec, sweep="detuning"))


def two_level_run(spec: SweepSpec, workers: int | None = 1) -> SweepResult:
    """Success vs total time for the genuine two-level (single-site) problem."""
    if spec.problem.kind != pb.SINGLE_SITE:
        raise ConfigurationError("two_level_run requires a single-site problem")
    return sweep_total_time(spec, workers=workers)


def _check_grid(values, name: str) -> None:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0 or np.any(np.diff(arr) <= 0.0):
        raise ConfigurationError(f"{name} must be strictly increasing and nonempty")


def _spec_metadata(spec: SweepSpec, **extra) -> dict:
    meta = {
        "problem_kind": spec.problem.kind,
        "schedule_kind": spec.schedule_kind,
        "bath_kind": spec.bath_kind or "none",
        "etas": "/".join(format_float(e) for e in spec.etas),
        "modes": "/".join(m.value for m in spec.modes),
        "tail_tol": spec.tail_tol,
    }
    if spec.problem.kind == pb.GROVER:
        meta["n"] = spec.problem.n
    else:
        meta["a0"] = spec.problem.a0
    for k, v in spec.bath_params:
        meta[f"bath_{k}"] = v
    if spec.T_fixed is not None:
        meta["T_fixed"] = spec.T_fixed
    meta.update(extra)
    return meta


# --------------------------------------------------------------------------
# spectral maps (no dynamics)

def gap_spectral_map(problem: pb.AdiabaticProblem, bath: Bath,
                     s_values, omega_values) -> SweepResult:
    """Closed-system energy gaps along s plus a J(omega) background grid."""
    _check_grid(s_values, "s_values")
    _check_grid(omega_values, "omega_values")
    rows = []
    for s in s_values:
        alpha = problem.alpha(s)
        rows.append({
            "record": "gap", "s": s, "omega": "",
            "E1_E0": alpha, "E2_E1": 0.5 - alpha / 2.0, "E2_E0": 0.5 + alpha / 2.0,
            "J": "",
        })
    for s in s_values:
        for w in omega_values:
            rows.append({
                "record": "background", "s": s, "omega": w,
                "E1_E0": "", "E2_E1": "", "E2_E0": "",
                "J": spectral_density(bath, w),
            })
    cols = ["record", "s", "omega", "E1_E0", "E2_E1", "E2_E0", "J"]
    return SweepResult(columns=cols, rows=rows,
                       metadata={"map": "gap_spectral", "bath_kind": type(bath).__name__})


def golden_rule_profile(problem: pb.AdiabaticProblem, bath: Bath,
                        s_values) -> SweepResult:
    """J evaluated at each level spacing along s.

    This is a density-of-states proxy only: the interaction matrix elements
    that would complete a transition-rate estimate are not computed.
    """
    _check_grid(s_values, "s_values")
    rows = []
    for s in s_values:
        alpha = problem.alpha(s)
        w01, w12, w02 = alpha, 0.5 - alpha / 2.0, 0.5 + alpha / 2.0
        rows.append({
            "s": s, "omega_01": w01, "omega_12": w12, "omega_02": w02,
            "J_01": spectral_density(bath, w01),
            "J_12": spectral_density(bath, w12),
            "J_02": spectral_density(bath, w02),
        })
    cols = ["s", "omega_01", "omega_12", "omega_02", "J_01", "J_12", "J_02"]
    return SweepResult(columns=cols, rows=rows,
                       metadata={"map": "golden_rule", "bath_kind": type(bath).__name__})


def spectral_density(bath: Bath, omega: float) -> float:
    if isinstance(bath, OhmicBath):
        return J_thermal(bath, omega)
    if isinstance(bath, StructuredBath):
        return J_structured(bath, omega)
    raise ConfigurationError(f"no spectral density for bath {type(bath).__name__}")


# --------------------------------------------------------------------------
# gnuplot companion scripts

def write_gnuplot_script(path, csv_name: str, xlabel: str, title: str) -> None:
    with open(path, "w") as fh:
        fh.write(
            "set datafile separator ','\n"
            f"set xlabel '{xlabel}'\n"
            "set ylabel 'final success probability'\n"
            f"set title '{title}'\n"
            "set key outside\n"
            f"plot '{csv_name}' using 1:4 with linespoints\n"
        )
