"""Two-level adiabatic problems, interpolation schedules and instantaneous-frame quantities.

The Hamiltonian acts on the span of the target state |m> and its uniform
orthogonal complement |m_perp>, and reads

    H_G(s) = 1/2 * 1 + 1/2 * (Omega(s) sigma_x - Delta(s) sigma_z),

with the orthogonal subspace sitting at fixed energy E2 = 1.  Both the
Grover reduction (any qubit count n) and a generic single-site two-level
problem are covered by the same (Delta, Omega) parametrization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, DomainError

GROVER = "grover"
SINGLE_SITE = "single_site"

LINEAR = "linear"
OPTIMAL = "optimal"


@dataclass(frozen=True)
class AdiabaticProblem:
    """Two-level reduced adiabatic problem with affine Delta(s), Omega(s)."""

    kind: str
    n: int | None = None
    N: int | None = None
    a0: float | None = None
    b0: float | None = None

    def delta(self, s: float) -> float:
        if self.kind == GROVER:
            return 2.0 * (1.0 - s) / self.N + (2.0 * s - 1.0)
        return (1.0 - s) * (self.b0 ** 2 - self.a0 ** 2) + s

    def omega(self, s: float) -> float:
        if self.kind == GROVER:
            return 2.0 * (s - 1.0) * math.sqrt(self.N - 1.0) / self.N
        return -2.0 * (1.0 - s) * self.a0 * self.b0

    # Delta and Omega are affine in s, so the derivatives are constants.
    def ddelta(self) -> float:
        if self.kind == GROVER:
            return 2.0 * (self.N - 1.0) / self.N
        return 2.0 * self.a0 ** 2

    def domega(self) -> float:
        if self.kind == GROVER:
            return 2.0 * math.sqrt(self.N - 1.0) / self.N
        return 2.0 * self.a0 * self.b0

    def alpha(self, s: float) -> float:
        return math.hypot(self.delta(s), self.omega(s))


def make_grover(n: int) -> AdiabaticProblem:
    """Grover search reduced to the two-level subspace, database size N = 2**n."""
    if not isinstance(n, int) or isinstance(n, bool):
        raise ConfigurationError(f"n must be an integer, got {n!r}")
    if not 1 <= n <= 30:
        raise ConfigurationError(f"n must satisfy 1 <= n <= 30, got {n}")
    return AdiabaticProblem(kind=GROVER, n=n, N=2 ** n)


def make_single_site(a0: float) -> AdiabaticProblem:
    """Generic two-level adiabatic problem with initial ground state a0|0> + b0|1>."""
    if not 0.0 < a0 < 1.0:
        raise ConfigurationError(f"a0 must lie strictly in (0, 1), got {a0}")
    return AdiabaticProblem(kind=SINGLE_SITE, a0=a0, b0=math.sqrt(1.0 - a0 ** 2))


@dataclass(frozen=True)
class ScheduleSpec:
    """Interpolation schedule s(t) on [0, T].

    For the optimal (gap-adapted) schedule, epsilon is calibrated from T so
    that s(T) = 1 exactly; see :func:`make_schedule`.
    """

    kind: str
    T: float
    epsilon: float | None = None


def calibrate_epsilon(problem: AdiabaticProblem, T: float) -> float:
    """Adiabatic-error parameter giving s_opt(T) = 1 for the given total time.

    Solving tan(2 eps T sqrt(N-1)/N - arctan sqrt(N-1)) = sqrt(N-1) on the
    traversed branch gives the closed form below (no root search needed).
    """
    N = problem.N
    r = math.sqrt(N - 1.0)
    return N * math.atan(r) / (T * r)


def make_schedule(kind: str, T: float, problem: AdiabaticProblem) -> ScheduleSpec:
    if T <= 0.0:
        raise ConfigurationError(f"total time T must be positive, got {T}")
    if kind == LINEAR:
        return ScheduleSpec(kind=LINEAR, T=T)
    if kind == OPTIMAL:
        if problem.kind != GROVER:
            raise ConfigurationError(
                "the optimal schedule is defined through the database size N "
                "and requires a Grover problem"
            )
        return ScheduleSpec(kind=OPTIMAL, T=T, epsilon=calibrate_epsilon(problem, T))
    raise ConfigurationError(f"unknown schedule kind {kind!r}")


def _check_time(t: float, spec: ScheduleSpec) -> None:
    slack = 1e-12 * max(1.0, spec.T)
    if t < -slack or t > spec.T + slack:
        raise DomainError(f"time {t} outside schedule range [0, {spec.T}]")


def schedule_s(t: float, spec: ScheduleSpec, problem: AdiabaticProblem) -> float:
    _check_time(t, spec)
    if spec.kind == LINEAR:
        return min(max(t / spec.T, 0.0), 1.0)
    N = problem.N
    r = math.sqrt(N - 1.0)
    u = 2.0 * spec.epsilon * t * r / N - math.atan(r)
    return 0.5 * (1.0 + math.tan(u) / r)


def schedule_sdot(t: float, spec: ScheduleSpec, problem: AdiabaticProblem) -> float:
    _check_time(t, spec)
    if spec.kind == LINEAR:
        return 1.0 / spec.T
    # sec^2(u) = 1 + (N-1)(2s-1)^2 = N alpha(s)^2, hence ds/dt = eps * alpha^2.
    s = schedule_s(t, spec, problem)
    return spec.epsilon * problem.alpha(s) ** 2


@dataclass(frozen=True)
class FrameSnapshot:
    """Instantaneous eigenframe data at schedule value s."""

    s: float
    delta: float
    omega: float
    alpha: float
    theta: float
    c: float        # cos(2 theta) = -Delta/alpha
    s_trig: float   # sin(2 theta) = -Omega/alpha
    e0: float
    e1: float
    e2: float
    theta_dot: float


def frame(problem: AdiabaticProblem, s: float, sdot: float) -> FrameSnapshot:
    """All instantaneous-frame quantities at schedule value s.

    theta is obtained from the two-argument arctangent of (sin 2theta,
    cos 2theta), which stays well-defined at the Delta + alpha -> 0
    coordinate singularity of the square-root eigenvector formulas.
    """
    delta = problem.delta(s)
    omega = problem.omega(s)
    alpha = math.hypot(delta, omega)
    if alpha <= 0.0:
        raise DomainError(f"degenerate gap alpha = 0 at s = {s}")
    c = -delta / alpha
    s_trig = -omega / alpha
    theta = 0.5 * math.atan2(s_trig, c)
    theta_dot = (delta * problem.domega() - omega * problem.ddelta()) / (2.0 * alpha ** 2) * sdot
    return FrameSnapshot(
        s=s, delta=delta, omega=omega, alpha=alpha, theta=theta,
        c=c, s_trig=s_trig,
        e0=0.5 - alpha / 2.0, e1=0.5 + alpha / 2.0, e2=1.0,
        theta_dot=theta_dot,
    )


def adiabatic_time_bound(problem: AdiabaticProblem, samples: int = 2001) -> float:
    """Diagnostic lower bound on T: max over s of |<1|dH/ds|0>| / alpha^2.

    Reported alongside runs; not used to pick schedules.
    """
    best = 0.0
    dd, do = problem.ddelta(), problem.domega()
    for i in range(samples):
        s = i / (samples - 1)
        f = frame(problem, s, 0.0)
        # dH/ds = (do*sigma_x - dd*sigma_z)/2 in the {|m>,|m_perp>} basis;
        # its |1><0| element in the eigenframe is (s_trig*dd - c*do)/2.
        elem = abs(f.s_trig * dd - f.c * do) / 2.0
        best = max(best, elem / f.alpha ** 2)
    return best
