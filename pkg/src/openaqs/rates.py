"""Time- and gap-dependent complex dissipation rates.

With the gap frozen at its current value alpha(t), the three rates are

    G00(t) = int_0^t g(u) du
    G01(t) = int_0^t g(u) exp(+i alpha u) du
    G10(t) = int_0^t g(u) exp(-i alpha u) du

evaluated by composite Simpson quadrature on the cached correlation grid,
with optional tail truncation once |g| has decayed below tail_tol |g(0)|.
The real-only mode discards the imaginary parts of all three rates before
any derived combination is formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .baths import CorrelationGrid, correlation
from .errors import DomainError, NumericalError


class RateMode(Enum):
    COMPLEX = "complex"
    REAL_ONLY = "real_only"


@dataclass(frozen=True)
class RateSet:
    """The three rates at one (t, alpha) plus their real/imaginary combinations."""

    t: float
    alpha: float
    g00: complex
    g01: complex
    g10: complex

    @property
    def gRp(self) -> float:
        return (self.g10 + self.g01).real

    @property
    def gRm(self) -> float:
        return (self.g10 - self.g01).real

    @property
    def gIp(self) -> float:
        return (self.g10 + self.g01).imag

    @property
    def gIm(self) -> float:
        return (self.g10 - self.g01).imag

    @property
    def re00(self) -> float:
        return self.g00.real

    @property
    def im00(self) -> float:
        return self.g00.imag


def _simpson_weights(k: int, h: float) -> np.ndarray:
    """Composite Simpson weights for k uniform intervals (3/8 patch for odd k)."""
    w = np.zeros(k + 1)
    if k == 0:
        return w
    if k == 1:
        w[:] = h / 2.0
        return w
    m = k if k % 2 == 0 else k - 3
    if m > 0:
        w[0] += h / 3.0
        w[m] += h / 3.0
        w[1:m:2] += 4.0 * h / 3.0
        w[2:m:2] += 2.0 * h / 3.0
    if k % 2 == 1:
        w[k - 3] += 3.0 * h / 8.0
        w[k - 2] += 9.0 * h / 8.0
        w[k - 1] += 9.0 * h / 8.0
        w[k] += 3.0 * h / 8.0
    return w


def rates_at(grid: CorrelationGrid, t: float, alpha: float,
             mode: RateMode = RateMode.COMPLEX) -> RateSet:
    """Rates at time t with the kernel gap frozen at alpha."""
    if t < 0.0:
        raise DomainError(f"time must be >= 0, got {t}")
    if alpha < 0.0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    h = grid.h
    if t > grid.horizon + 1e-9 * max(1.0, grid.horizon):
        raise DomainError(f"time {t} beyond grid horizon {grid.horizon}")
    k_exact = t / h
    k = int(math.floor(k_exact + 1e-9))
    k = min(k, len(grid.samples) - 1)
    kq = min(k, grid.tail_cut)  # integrate only while |g| is non-negligible
    if kq > 0:
        w = _simpson_weights(kq, h)
        gs = grid.samples[:kq + 1]
        tau = np.arange(kq + 1) * h
        e = np.exp(1j * alpha * tau)
        wg = w * gs
        g00 = complex(np.sum(wg))
        g01 = complex(np.dot(wg, e))
        g10 = complex(np.dot(wg, np.conj(e)))
    else:
        g00 = g01 = g10 = 0.0 + 0.0j
    rem = t - k * h
    if rem > 1e-9 * max(1.0, t) and k < grid.tail_cut:
        # off-lattice endpoint: close with a trapezoid using a direct evaluation
        ga = grid.samples[k]
        gb = correlation(grid.bath, t)
        ea = np.exp(1j * alpha * k * h)
        eb = np.exp(1j * alpha * t)
        g00 += rem / 2.0 * (ga + gb)
        g01 += rem / 2.0 * (ga * ea + gb * eb)
        g10 += rem / 2.0 * (ga * np.conj(ea) + gb * np.conj(eb))
    if mode is RateMode.REAL_ONLY:
        g00, g01, g10 = complex(g00.real), complex(g01.real), complex(g10.real)
    return RateSet(t=t, alpha=alpha, g00=g00, g01=g01, g10=g10)


def dissipator(rho: np.ndarray, c: float, s_trig: float, rs: RateSet) -> np.ndarray:
    """Second-order dissipator in the instantaneous eigenbasis.

    The coupling operator sigma_z of the {|m>,|m_perp>} basis reads
    A = -c sigma_z - s sigma_x in the eigenframe; the kernel integrals dress
    its matrix elements into Atil/Abar, and the dissipator is
    -(A Atil rho - Atil rho A) - (rho Abar A - A rho Abar).
    """
    A = np.array([[-c, -s_trig], [-s_trig, c]], dtype=complex)
    Atil = np.array([[-c * rs.g00, -s_trig * rs.g01],
                     [-s_trig * rs.g10, c * rs.g00]])
    Abar = np.conj(Atil).T  # A real symmetric; Abar_{nl} = A_{nl} conj(G_{ln})
    return -(A @ Atil @ rho - Atil @ rho @ A) - (rho @ Abar @ A - A @ rho @ Abar)


def markovian_limit_check(weight: float, sigma: float, alpha: float = 1.0,
                          t_max: float = 40.0, h: float | None = None) -> float:
    """Fit the coherence decay rate for a narrow-kernel bath at a static gap.

    Integrates the dissipative dynamics with a frozen frame whose coupling
    operator is diagonal (c = -1, s = 0, theta_dot = 0), so the bath induces
    pure dephasing.  In the delta-kernel limit the decay rate of |rho_01|
    tends to 4 * weight, which callers use as the analytic oracle.
    Raises NumericalError if the decay is not exponential.
    """
    from .baths import GaussianDeltaBath, build_correlation_grid

    bath = GaussianDeltaBath(weight=weight, sigma=sigma)
    if h is None:
        h = min(0.05, sigma / 4.0, 0.1 / max(alpha, 1e-12))
    grid = build_correlation_grid(bath, t_max + h, h, tail_tol=0.0)
    n = int(round(t_max / h))
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    ham = np.array([[-alpha / 2.0, 0.0], [0.0, alpha / 2.0]], dtype=complex)

    def rhs(tk: float, r: np.ndarray) -> np.ndarray:
        rs = rates_at(grid, tk, alpha)
        return -1j * (ham @ r - r @ ham) + dissipator(r, -1.0, 0.0, rs)

    times, coh = [], []
    for i in range(n):
        t0 = i * h
        k1 = rhs(t0, rho)
        k2 = rhs(t0 + h / 2.0, rho + h / 2.0 * k1)
        k3 = rhs(t0 + h / 2.0, rho + h / 2.0 * k2)
        k4 = rhs(t0 + h, rho + h * k3)
        rho = rho + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        times.append(t0 + h)
        coh.append(abs(rho[0, 1]))
    times = np.asarray(times)
    coh = np.asarray(coh)
    # skip the kernel build-up transient, then fit log|rho_01| linearly
    sel = times > max(10.0 * sigma, 0.1 * t_max)
    y = np.log(np.clip(coh[sel], 1e-300, None))
    x = times[sel]
    slope, intercept = np.polyfit(x, y, 1)
    if weight > 0.0:
        resid = y - (slope * x + intercept)
        span = max(abs(y[0] - y[-1]), 1e-12)
        if np.max(np.abs(resid)) > 0.05 * span + 1e-6:
            raise NumericalError(
                "coherence decay is not exponential within tolerance "
                f"(max residual {np.max(np.abs(resid)):.3e} over span {span:.3e})")
    return -slope


def slow_gap_ratio(dalpha_dt: float, alpha: float, tau_c: float) -> float:
    """Frozen-gap validity diagnostic (rate of gap change over a correlation time)."""
    if alpha <= 0.0:
        return math.inf
    return abs(dalpha_dt) / alpha * tau_c
