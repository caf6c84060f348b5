"""Environment models: correlation functions, spectral densities, cached grids.

Two production environments are provided:

* :class:`OhmicBath` -- thermal bosonic bath with spectral density
  J(w) = eta * w^s * w_c^(1-s) * exp(-w/w_c); the correlation function is
  obtained by adaptive oscillatory quadrature of
  g(t) = int_0^inf dw J(w) [coth(beta w / 2) cos(w t) - i sin(w t)].
  At zero temperature (beta = inf) and s = 1 the integral has the closed
  form eta * w_c^2 / (1 + i w_c t)^2, which the tests use as an
  independent oracle.

* :class:`StructuredBath` -- photonic-crystal-like environment with a hard
  gap below the band edge:  g(t) = OmegaL2 * exp(i sgn * dL * t) * (1 + i w0 t)^(-3/2)
  and J(w) = eta * sqrt(2 (w - dL)) * exp(-2 (w - dL) / w0) above the edge.

A third, test-support environment (:class:`GaussianDeltaBath`) provides a
narrow real kernel of fixed integral weight, used to probe the
delta-correlated (Lindblad) limit.

Correlation grids cache g on a uniform time lattice so that the rate
quadrature can reuse samples across all times and gaps of a run.  Since g
is homogeneous of degree one in the coupling, unit-coupling sample arrays
are cached per bath shape and rescaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConfigurationError, NumericalError

_ALPHA_MAX = 1.0  # largest oscillation frequency appearing in the rate kernels


@dataclass(frozen=True)
class OhmicBath:
    """Thermal bosonic bath with exponentially cut-off power-law spectral density."""

    eta: float
    omega_c: float
    s_exp: float = 1.0
    beta: float = math.inf  # inverse temperature; inf means zero temperature

    def __post_init__(self):
        if self.eta < 0.0:
            raise ConfigurationError(f"eta must be >= 0, got {self.eta}")
        if self.omega_c <= 0.0:
            raise ConfigurationError(f"omega_c must be > 0, got {self.omega_c}")
        if self.s_exp < 1.0:
            raise ConfigurationError(
                f"s_exp must be >= 1 (sub-ohmic exponents unsupported), got {self.s_exp}")
        if self.beta <= 0.0:
            raise ConfigurationError(f"beta must be > 0 (or inf), got {self.beta}")

    def shape_key(self):
        return ("thermal", self.s_exp, self.omega_c, self.beta)

    def resolution_bound(self) -> float:
        return min(0.1 / self.omega_c, 0.05 / _ALPHA_MAX)


@dataclass(frozen=True)
class StructuredBath:
    """Band-gap environment of a trapped-atom lattice coupled to a matter-wave field."""

    eta: float
    omega0: float
    deltaL: float
    phase_sign: int = +1

    def __post_init__(self):
        if self.eta < 0.0:
            raise ConfigurationError(f"eta must be >= 0, got {self.eta}")
        if self.omega0 <= 0.0:
            raise ConfigurationError(f"omega0 must be > 0, got {self.omega0}")
        if self.phase_sign not in (+1, -1):
            raise ConfigurationError(f"phase_sign must be +1 or -1, got {self.phase_sign}")

    @property
    def omegaL2(self) -> float:
        """Squared Rabi frequency implied by the dimensionless coupling eta."""
        return self.eta * self.omega0 ** 1.5 / (8.0 * math.sqrt(math.pi))

    def shape_key(self):
        return ("structured", self.omega0, self.deltaL, self.phase_sign)

    def resolution_bound(self) -> float:
        return min(0.1 / self.omega0, 0.05 / _ALPHA_MAX)


@dataclass(frozen=True)
class GaussianDeltaBath:
    """Narrow real Gaussian kernel with int_0^inf g = weight (Lindblad-limit probe)."""

    weight: float
    sigma: float

    def __post_init__(self):
        if self.weight < 0.0:
            raise ConfigurationError(f"weight must be >= 0, got {self.weight}")
        if self.sigma <= 0.0:
            raise ConfigurationError(f"sigma must be > 0, got {self.sigma}")

    def shape_key(self):
        return ("delta", self.sigma)

    def resolution_bound(self) -> float:
        return min(self.sigma / 4.0, 0.05 / _ALPHA_MAX)


Bath = OhmicBath | StructuredBath | GaussianDeltaBath


# --------------------------------------------------------------------------
# spectral densities

def J_thermal(bath: OhmicBath, omega):
    omega = np.asarray(omega, dtype=float)
    out = bath.eta * omega ** bath.s_exp * bath.omega_c ** (1.0 - bath.s_exp) \
        * np.exp(-omega / bath.omega_c)
    return out if out.ndim else float(out)


def J_structured(bath: StructuredBath, omega):
    omega = np.asarray(omega, dtype=float)
    x = omega - bath.deltaL
    out = np.where(
        x > 0.0,
        bath.eta * np.sqrt(2.0 * np.clip(x, 0.0, None)) * np.exp(-2.0 * np.clip(x, 0.0, None) / bath.omega0),
        0.0,
    )
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# correlation functions

def _thermal_weight(bath: OhmicBath, omega: float) -> float:
    """J(w) * coth(beta w / 2), finite at w -> 0 for the ohmic exponent."""
    if math.isinf(bath.beta):
        return J_thermal(bath, omega)
    x = bath.beta * omega / 2.0
    if x < 1e-8:
        # coth(x) ~ 1/x + x/3; with J ~ eta*w this tends to 2*eta/beta
        coth = 1.0 / x + x / 3.0 if x > 0.0 else 0.0
        if omega == 0.0:
            return 2.0 * bath.eta / bath.beta * bath.omega_c ** (1.0 - bath.s_exp) \
                if bath.s_exp == 1.0 else 0.0
        return J_thermal(bath, omega) * coth
    return J_thermal(bath, omega) / math.tanh(x)


def g_thermal(bath: OhmicBath, t: float, rtol: float = 1e-10) -> complex:
    """Bath correlation function by adaptive quadrature of the spectral integral.

    The oscillatory cos/sin factors are handled by QUADPACK's weighted
    (Clenshaw-Curtis) rules, which subdivide according to the oscillation
    wavelength.  Raises NumericalError if the error estimate is not trusted.
    """
    if math.isinf(bath.beta):
        cut = 40.0 * bath.omega_c
    else:
        cut = bath.omega_c * max(40.0, 10.0 + 5.0 / (bath.beta * bath.omega_c))
    at = abs(t)
    re, re_err = quad(lambda w: _thermal_weight(bath, w), 0.0, cut,
                      weight="cos", wvar=at, epsabs=1e-14, epsrel=rtol, limit=400)
    im, im_err = quad(lambda w: J_thermal(bath, w), 0.0, cut,
                      weight="sin", wvar=at, epsabs=1e-14, epsrel=rtol, limit=400)
    # g(0) scale, including the thermal enhancement of the real part
    enh = 1.0 if math.isinf(bath.beta) else max(1.0, 2.0 / (bath.beta * bath.omega_c))
    scale0 = max(bath.eta * bath.omega_c ** 2 * enh, 1e-300)
    tol_re = 1e-8 * scale0 + 1e-6 * abs(re)
    tol_im = 1e-8 * scale0 + 1e-6 * abs(im)
    if re_err > tol_re or im_err > tol_im:
        raise NumericalError(
            f"thermal correlation quadrature did not converge at t={t}: "
            f"error estimates ({re_err:.3e}, {im_err:.3e}) vs scale {scale0:.3e}")
    g = complex(re, -im)
    return g.conjugate() if t < 0.0 else g


def g_structured(bath: StructuredBath, t: float) -> complex:
    """Closed-form correlation function, principal branch of (1 + i w0 t)^(3/2)."""
    nu3 = (1.0 + 1j * bath.omega0 * t) ** 1.5
    return bath.omegaL2 * complex(np.exp(1j * bath.phase_sign * bath.deltaL * t)) / nu3


def g_delta(bath: GaussianDeltaBath, t: float) -> complex:
    amp = bath.weight * math.sqrt(2.0 / math.pi) / bath.sigma
    return complex(amp * math.exp(-0.5 * (t / bath.sigma) ** 2))


def correlation(bath: Bath, t: float) -> complex:
    if isinstance(bath, OhmicBath):
        return g_thermal(bath, t)
    if isinstance(bath, StructuredBath):
        return g_structured(bath, t)
    return g_delta(bath, t)


def coupling_of(bath: Bath) -> float:
    """The overall coupling prefactor g is linear in (eta or weight)."""
    return bath.weight if isinstance(bath, GaussianDeltaBath) else bath.eta


def _with_unit_coupling(bath: Bath) -> Bath:
    if isinstance(bath, OhmicBath):
        return OhmicBath(eta=1.0, omega_c=bath.omega_c, s_exp=bath.s_exp, beta=bath.beta)
    if isinstance(bath, StructuredBath):
        return StructuredBath(eta=1.0, omega0=bath.omega0, deltaL=bath.deltaL,
                              phase_sign=bath.phase_sign)
    return GaussianDeltaBath(weight=1.0, sigma=bath.sigma)


# --------------------------------------------------------------------------
# correlation grids

#: unit-coupling sample cache: (shape_key, h) -> complex ndarray
_SAMPLE_CACHE: dict[tuple, np.ndarray] = {}

MAX_GRID_SAMPLES = 20_000_000


@dataclass(frozen=True)
class CorrelationGrid:
    """Uniform cache of g(k*h) for k = 0..n, with a tail-truncation index."""

    bath: Bath
    horizon: float
    h: float
    samples: np.ndarray  # complex, len n+1
    tail_cut: int        # first index where |g| < tail_tol * |g(0)| (or len)
    tail_tol: float


def _unit_samples(bath: Bath, h: float, count: int) -> np.ndarray:
    key = (bath.shape_key(), h)
    cached = _SAMPLE_CACHE.get(key)
    if cached is not None and len(cached) >= count:
        return cached[:count]
    unit = _with_unit_coupling(bath)
    start = len(cached) if cached is not None else 0
    t = np.arange(start, count) * h
    if isinstance(unit, StructuredBath):
        new = unit.omegaL2 * np.exp(1j * unit.phase_sign * unit.deltaL * t) \
            / (1.0 + 1j * unit.omega0 * t) ** 1.5
    elif isinstance(unit, GaussianDeltaBath):
        new = (np.sqrt(2.0 / np.pi) / unit.sigma
               * np.exp(-0.5 * (t / unit.sigma) ** 2)).astype(complex)
    else:
        new = np.array([g_thermal(unit, tk) for tk in t], dtype=complex)
    full = new if cached is None else np.concatenate([cached, new])
    _SAMPLE_CACHE[key] = full
    return full[:count]


def build_correlation_grid(bath: Bath, t_grid: float, h: float,
                           tail_tol: float = 1e-6) -> CorrelationGrid:
    """Sample g on a uniform lattice covering [0, t_grid] with step h."""
    if h <= 0.0:
        raise ConfigurationError(f"grid step must be positive, got {h}")
    bound = bath.resolution_bound()
    if h > bound * (1.0 + 1e-12):
        raise ConfigurationError(
            f"grid step {h} too coarse for this bath; need h <= {bound}")
    if tail_tol < 0.0:
        raise ConfigurationError(f"tail_tol must be >= 0, got {tail_tol}")
    n = int(math.ceil(t_grid / h - 1e-12))
    if n + 1 > MAX_GRID_SAMPLES:
        raise ConfigurationError(
            f"correlation grid would need {n + 1} samples "
            f"(cap {MAX_GRID_SAMPLES}); increase h or shorten the horizon")
    samples = coupling_of(bath) * _unit_samples(bath, h, n + 1)
    if tail_tol > 0.0 and len(samples) > 1 and abs(samples[0]) > 0.0:
        below = np.abs(samples) < tail_tol * abs(samples[0])
        tail_cut = int(np.argmax(below)) if below.any() else len(samples)
        if tail_cut == 0:
            tail_cut = len(samples)
    else:
        tail_cut = len(samples)
    return CorrelationGrid(bath=bath, horizon=n * h, h=h, samples=samples,
                           tail_cut=tail_cut, tail_tol=tail_tol)
