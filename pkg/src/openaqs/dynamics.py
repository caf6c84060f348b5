"""Open-system integrators in the instantaneous eigenbasis.

Three formulations of the same dynamics are provided:

* ``matrix`` (canonical): the weak-coupling master equation projected onto
  the instantaneous eigenbasis, with basis-rotation terms expressed through
  theta_dot and the dissipator assembled from 2x2 matrix products
  (:func:`openaqs.rates.dissipator`).

* ``bloch``: the same equations written out for the Bloch components
  (rho_x, rho_y, rho_z); used as a cross-check of the matrix form.  The
  coefficients were obtained by symbolically expanding the matrix
  formulation (see docs/equations.md) and satisfy two structural checks
  that pin them down: the maximally mixed state is stationary in the
  closed limit, and a zero-temperature bath relaxes the system onto the
  instantaneous ground state.

* ``closed``: an independent lab-frame Schrodinger oracle (scipy DOP853 on
  the two-level wavefunction, projected onto the instantaneous eigenbasis
  after the fact); used to validate the eta = 0 limit of the other two.

State convention: basis order (|0(t)>, |1(t)>), rho_01 = <0|rho|1>,
p0 = <0|rho|0> = (1 + rho_z)/2, rho_x = 2 Re rho_01, rho_y = -2 Im rho_01.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import problem as pb
from .baths import Bath, CorrelationGrid, build_correlation_grid, coupling_of
from .errors import ConfigurationError, NumericalError, PhysicalityWarning
from .rates import RateMode, RateSet, dissipator, rates_at

MATRIX = "matrix"
BLOCH = "bloch"
CLOSED = "closed"

BLOCH_NORM_TOL = 1e-6     # physicality monitor threshold on |r|^2 - 1
BLOCH_FLAG_LEVEL = 0.05   # excess beyond which the run is flagged


@dataclass(frozen=True)
class DensityState:
    """Reduced 2x2 state in the instantaneous eigenbasis (trace 1 by construction)."""

    p0: float
    coherence: complex  # rho_01

    @property
    def rho_x(self) -> float:
        return 2.0 * self.coherence.real

    @property
    def rho_y(self) -> float:
        return -2.0 * self.coherence.imag

    @property
    def rho_z(self) -> float:
        return 2.0 * self.p0 - 1.0

    @property
    def bloch_norm_sq(self) -> float:
        return self.rho_x ** 2 + self.rho_y ** 2 + self.rho_z ** 2

    @property
    def purity(self) -> float:
        return 0.5 * (1.0 + self.bloch_norm_sq)

    def matrix(self) -> np.ndarray:
        return np.array([[self.p0, self.coherence],
                         [np.conj(self.coherence), 1.0 - self.p0]])


@dataclass(frozen=True)
class IntegratorConfig:
    h: float | None = None           # None: h = min(0.1/alpha_max, T/1000)
    formulation: str = MATRIX
    tol_consistency: float = 2e-3
    sample_target: int = 256         # trajectory sampling density (>= 200 kept)
    tail_tol: float = 1e-6
    store_rates: bool = False

    def __post_init__(self):
        if self.h is not None and self.h <= 0.0:
            raise ConfigurationError(f"step h must be positive, got {self.h}")
        if self.formulation not in (MATRIX, BLOCH, CLOSED):
            raise ConfigurationError(f"unknown formulation {self.formulation!r}")
        if self.sample_target < 200:
            raise ConfigurationError("sample_target must be >= 200")


@dataclass
class Trajectory:
    times: np.ndarray
    p0: np.ndarray
    rho_x: np.ndarray
    rho_y: np.ndarray
    rho_z: np.ndarray
    frames: list[pb.FrameSnapshot]
    rates: list[RateSet] | None
    metadata: dict = field(default_factory=dict)

    @property
    def final_state(self) -> DensityState:
        return DensityState(
            p0=float(self.p0[-1]),
            coherence=complex(self.rho_x[-1] / 2.0, -self.rho_y[-1] / 2.0),
        )

    @property
    def final_success(self) -> float:
        return float(self.p0[-1])

    def purity(self) -> np.ndarray:
        return 0.5 * (1.0 + self.rho_x ** 2 + self.rho_y ** 2 + self.rho_z ** 2)

    def write_csv(self, path) -> None:
        from .experiments import format_float
        with open(path, "w", newline="") as fh:
            for key in sorted(self.metadata):
                fh.write(f"# {key}={self.metadata[key]}\n")
            fh.write("t,s,alpha,p0,rho_x,rho_y,rho_z,purity\n")
            purity = self.purity()
            for i, t in enumerate(self.times):
                f = self.frames[i]
                row = [t, f.s, f.alpha, self.p0[i], self.rho_x[i],
                       self.rho_y[i], self.rho_z[i], purity[i]]
                fh.write(",".join(format_float(v) for v in row) + "\n")


def success_probability(state: DensityState, s: float = 1.0) -> float:
    """Population of the instantaneous ground state (the search target at s = 1)."""
    return state.p0


# --------------------------------------------------------------------------
# right-hand sides

def rhs_matrix(state: np.ndarray, frm: pb.FrameSnapshot,
               rs: RateSet | None) -> np.ndarray:
    """Derivative of (p0, Re rho01, Im rho01) in the matrix formulation."""
    p0, qr, qi = state
    q = complex(qr, qi)
    rho = np.array([[p0, q], [q.conjugate(), 1.0 - p0]], dtype=complex)
    alpha = frm.alpha
    th = frm.theta_dot
    # coherent part: -i[diag(E0,E1), rho] -> d(rho01) = +i alpha rho01
    dq = 1j * alpha * q
    dp0 = 0.0
    # basis rotation: |0dot> = -theta_dot |1>, |1dot> = +theta_dot |0>
    dp0 += -th * (2.0 * qr)
    dq += th * (2.0 * p0 - 1.0)
    if rs is not None:
        d = dissipator(rho, frm.c, frm.s_trig, rs)
        dp0 += d[0, 0].real
        dq += d[0, 1]
    return np.array([dp0, dq.real, dq.imag])


def rhs_bloch(state: np.ndarray, frm: pb.FrameSnapshot,
              rs: RateSet | None) -> np.ndarray:
    """Derivative of (p0, Re rho01, Im rho01) via the Bloch-component equations."""
    p0, qr, qi = state
    rx, ry, rz = 2.0 * qr, -2.0 * qi, 2.0 * p0 - 1.0
    alpha = frm.alpha
    th = frm.theta_dot
    c, s = frm.c, frm.s_trig
    if rs is None:
        gRp = gRm = gIp = gIm = re00 = im00 = 0.0
    else:
        gRp, gRm, gIp, gIm = rs.gRp, rs.gRm, rs.gIp, rs.gIm
        re00, im00 = rs.re00, rs.im00
    cs = c * s
    dx = (2.0 * cs * gRm
          - 4.0 * c * c * re00 * rx
          + alpha * ry
          + (2.0 * cs * gRp + 2.0 * th) * rz)
    dy = (2.0 * cs * (gIp - 2.0 * im00)
          + (2.0 * s * s * gIm - alpha) * rx
          - (4.0 * c * c * re00 + 2.0 * s * s * gRp) * ry
          + 2.0 * cs * gIm * rz)
    dz = (-2.0 * s * s * gRm
          + (4.0 * cs * re00 - 2.0 * th) * rx
          - 2.0 * s * s * gRp * rz)
    return np.array([dz / 2.0, dx / 2.0, -dy / 2.0])


_RHS = {MATRIX: rhs_matrix, BLOCH: rhs_bloch}


# --------------------------------------------------------------------------
# closed-system lab-frame oracle

def integrate_closed_lab(problem: pb.AdiabaticProblem, schedule: pb.ScheduleSpec,
                         sample_times: np.ndarray, rtol: float = 1e-11,
                         atol: float = 1e-13) -> np.ndarray:
    """Schrodinger evolution in the fixed {|m>,|m_perp>} basis.

    Returns the wavefunction (2 x len(sample_times)); callers project onto
    the instantaneous eigenbasis.  Kept free of the fixed-step machinery so
    it can serve as an independent oracle.
    """
    f0 = pb.frame(problem, pb.schedule_s(0.0, schedule, problem), 0.0)
    psi0 = np.array([math.sin(f0.theta), math.cos(f0.theta)], dtype=complex)

    def rhs(t, y):
        s = pb.schedule_s(min(t, schedule.T), schedule, problem)
        delta = problem.delta(s)
        omega = problem.omega(s)
        # H = (Omega sigma_x - Delta sigma_z)/2, global 1/2 trace dropped
        return -0.5j * np.array([
            -delta * y[0] + omega * y[1],
            omega * y[0] + delta * y[1],
        ])

    sol = solve_ivp(rhs, (0.0, schedule.T), psi0, t_eval=sample_times,
                    method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericalError(f"closed-system oracle failed: {sol.message}")
    return sol.y


def _project_closed(problem, schedule, sample_times, psi):
    p0 = np.empty(len(sample_times))
    qs = np.empty(len(sample_times), dtype=complex)
    frames = []
    for i, t in enumerate(sample_times):
        s = pb.schedule_s(t, schedule, problem)
        frm = pb.frame(problem, s, pb.schedule_sdot(t, schedule, problem))
        g = np.array([math.sin(frm.theta), math.cos(frm.theta)])
        e = np.array([-math.cos(frm.theta), math.sin(frm.theta)])
        a0 = np.vdot(g, psi[:, i])
        a1 = np.vdot(e, psi[:, i])
        p0[i] = abs(a0) ** 2
        qs[i] = a0 * np.conj(a1)
        frames.append(frm)
    return p0, qs, frames


# --------------------------------------------------------------------------
# the driver

def _auto_step(T: float) -> float:
    return min(0.1, T / 1000.0)


def integrate(problem: pb.AdiabaticProblem, schedule: pb.ScheduleSpec,
              bath: Bath | None = None, mode: RateMode = RateMode.COMPLEX,
              config: IntegratorConfig | None = None,
              grid: CorrelationGrid | None = None) -> Trajectory:
    """Integrate the reduced dynamics from the instantaneous ground state at t = 0.

    The fixed-step RK4 walks a uniform lattice of step h (plus one short
    final step so that t = T is hit exactly); stage times therefore live on
    the h/2 lattice shared with the correlation grid, which lets the rate
    quadrature reuse cached samples.  A bath with zero coupling, or no bath,
    yields the closed rotating-frame equations.
    """
    config = config or IntegratorConfig()
    T = schedule.T
    open_system = bath is not None and coupling_of(bath) > 0.0

    if config.formulation == CLOSED or not open_system:
        if config.formulation == CLOSED:
            n_samp = max(config.sample_target, 200)
            sample_times = np.linspace(0.0, T, n_samp + 1)
            psi = integrate_closed_lab(problem, schedule, sample_times)
            p0, qs, frames = _project_closed(problem, schedule, sample_times, psi)
            meta = _base_metadata(problem, schedule, bath, mode, config, None)
            return _assemble(sample_times, p0, qs, frames, None, meta)

    h = config.h if config.h is not None else _auto_step(T)
    n_full = int(math.floor(T / h + 1e-9))
    rem = T - n_full * h
    steps = [h] * n_full + ([rem] if rem > 1e-12 * max(1.0, T) else [])
    n_steps = len(steps)

    if open_system and grid is None:
        grid = build_correlation_grid(bath, T + h, h / 2.0, tail_tol=config.tail_tol)
    if open_system and grid.horizon + 1e-9 < T:
        raise ConfigurationError(
            f"correlation grid horizon {grid.horizon} shorter than T = {T}")

    rhs = _RHS[config.formulation]

    def frame_at(t: float) -> pb.FrameSnapshot:
        t = min(t, T)
        s = pb.schedule_s(t, schedule, problem)
        return pb.frame(problem, s, pb.schedule_sdot(t, schedule, problem))

    def rates_for(t: float, frm: pb.FrameSnapshot) -> RateSet | None:
        if not open_system:
            return None
        return rates_at(grid, min(t, T), frm.alpha, mode)

    stride = max(1, n_steps // config.sample_target)

    y = np.array([1.0, 0.0, 0.0])
    t = 0.0
    frm0 = frame_at(0.0)
    rs0 = rates_for(0.0, frm0)

    times = [0.0]
    states = [y.copy()]
    frames = [frm0]
    stored_rates = [rs0] if config.store_rates else None

    max_norm_sq = 1.0
    max_slow_gap = 0.0
    tau_c = (grid.tail_cut * grid.h) if open_system else 0.0
    flagged = False

    frm_a, rs_a = frm0, rs0
    for i, hi in enumerate(steps):
        t_mid = t + hi / 2.0
        t_end = t + hi
        frm_m = frame_at(t_mid)
        rs_m = rates_for(t_mid, frm_m)
        frm_b = frame_at(t_end)
        rs_b = rates_for(t_end, frm_b)

        k1 = rhs(y, frm_a, rs_a)
        k2 = rhs(y + hi / 2.0 * k1, frm_m, rs_m)
        k3 = rhs(y + hi / 2.0 * k2, frm_m, rs_m)
        k4 = rhs(y + hi * k3, frm_b, rs_b)
        y = y + hi / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t_end

        if not np.all(np.isfinite(y)):
            raise NumericalError(f"integration diverged at t = {t:.6g}")

        norm_sq = (2.0 * y[0] - 1.0) ** 2 + 4.0 * (y[1] ** 2 + y[2] ** 2)
        max_norm_sq = max(max_norm_sq, norm_sq)
        if norm_sq > 1.0 + BLOCH_FLAG_LEVEL:
            flagged = True
        if open_system:
            dalpha = (frm_b.alpha - frm_a.alpha) / hi
            ratio = abs(dalpha) / max(frm_b.alpha, 1e-300) * tau_c
            max_slow_gap = max(max_slow_gap, ratio)

        if (i + 1) % stride == 0 or i == n_steps - 1:
            times.append(t)
            states.append(y.copy())
            frames.append(frm_b)
            if config.store_rates:
                stored_rates.append(rs_b)
        frm_a, rs_a = frm_b, rs_b

    if flagged:
        warnings.warn(
            f"Bloch vector left the unit ball (max |r|^2 = {max_norm_sq:.4f}); "
            "the weak-coupling description is breaking down for this run",
            PhysicalityWarning, stacklevel=2)

    meta = _base_metadata(problem, schedule, bath, mode, config, h)
    meta.update(
        max_bloch_norm_sq=max_norm_sq,
        physicality_flag=flagged,
        physicality_tol=BLOCH_NORM_TOL,
        max_slow_gap_ratio=max_slow_gap,
        correlation_time=tau_c,
        steps=n_steps,
    )
    ts = np.asarray(times)
    arr = np.asarray(states)
    qs = arr[:, 1] + 1j * arr[:, 2]
    return _assemble(ts, arr[:, 0], qs, frames, stored_rates, meta)


def _assemble(times, p0, qs, frames, stored_rates, meta) -> Trajectory:
    return Trajectory(
        times=np.asarray(times),
        p0=np.asarray(p0, dtype=float),
        rho_x=2.0 * np.real(qs),
        rho_y=-2.0 * np.imag(qs),
        rho_z=2.0 * np.asarray(p0, dtype=float) - 1.0,
        frames=frames,
        rates=stored_rates,
        metadata=meta,
    )


def _base_metadata(problem, schedule, bath, mode, config, h) -> dict:
    meta = {
        "problem_kind": problem.kind,
        "schedule_kind": schedule.kind,
        "T": schedule.T,
        "formulation": config.formulation,
        "mode": mode.value,
        "h": h,
    }
    if problem.kind == pb.GROVER:
        meta["n"] = problem.n
        meta["N"] = problem.N
    else:
        meta["a0"] = problem.a0
    if schedule.epsilon is not None:
        meta["epsilon"] = schedule.epsilon
    if bath is not None:
        meta["bath"] = type(bath).__name__
        for k, v in vars(bath).items():
            meta[f"bath_{k}"] = v
    return meta
