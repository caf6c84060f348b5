"""Open-system simulation of adiabatic quantum search.

Simulates the two-level reduction of an adiabatic search Hamiltonian coupled
to a thermal or a band-gap (structured) environment through a weak-coupling
master equation with time-dependent complex dissipation rates.  All units are
dimensionless with the top of the spectrum at energy 1 and hbar = 1.
"""

from .baths import (Bath, CorrelationGrid, GaussianDeltaBath, OhmicBath,
                    StructuredBath, build_correlation_grid, correlation,
                    J_structured, J_thermal)
from .dynamics import (BLOCH, CLOSED, MATRIX, DensityState, IntegratorConfig,
                       Trajectory, integrate, integrate_closed_lab,
                       success_probability)
from .errors import (ConfigurationError, DomainError, NumericalError,
                     OpenAQSError, PhysicalityWarning)
from .experiments import (SweepResult, SweepSpec, default_time_grid,
                          gap_spectral_map, golden_rule_profile, make_bath,
                          sweep_detuning, sweep_total_time, t_lin,
                          two_level_run)
from .problem import (AdiabaticProblem, FrameSnapshot, ScheduleSpec,
                      adiabatic_time_bound, calibrate_epsilon, frame,
                      make_grover, make_schedule, make_single_site,
                      schedule_s, schedule_sdot)
from .rates import (RateMode, RateSet, dissipator, markovian_limit_check,
                    rates_at, slow_gap_ratio)

__all__ = [
    "AdiabaticProblem", "Bath", "BLOCH", "CLOSED", "ConfigurationError",
    "CorrelationGrid", "DensityState", "DomainError", "FrameSnapshot",
    "GaussianDeltaBath", "IntegratorConfig", "J_structured", "J_thermal",
    "MATRIX", "NumericalError", "OhmicBath", "OpenAQSError",
    "PhysicalityWarning", "RateMode", "RateSet", "ScheduleSpec",
    "StructuredBath", "SweepResult", "SweepSpec", "Trajectory",
    "adiabatic_time_bound", "build_correlation_grid", "calibrate_epsilon",
    "correlation", "default_time_grid", "dissipator", "frame",
    "gap_spectral_map", "golden_rule_profile", "integrate",
    "integrate_closed_lab", "make_bath", "make_grover", "make_schedule",
    "make_single_site", "markovian_limit_check", "rates_at", "schedule_s",
    "schedule_sdot", "slow_gap_ratio", "success_probability",
    "sweep_detuning", "sweep_total_time", "t_lin", "two_level_run",
]
