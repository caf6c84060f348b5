"""Unit tests for the two-level problems, schedules, and frame quantities."""

import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from openaqs import (ConfigurationError, DomainError, adiabatic_time_bound,
                     calibrate_epsilon, frame, make_grover, make_schedule,
                     make_single_site, schedule_s, schedule_sdot)


class TestGrover:
    def test_midpoint_values_n10(self):
        p = make_grover(10)
        assert p.N == 1024
        assert p.delta(0.5) == pytest.approx(1.0 / 1024, abs=1e-15)
        assert p.omega(0.5) == pytest.approx(-math.sqrt(1023) / 1024, abs=1e-15)
        assert p.alpha(0.5) == pytest.approx(1.0 / 32, abs=1e-12)

    def test_endpoint_gaps(self):
        p = make_grover(10)
        assert abs(p.alpha(0.0) - 1.0) < 1e-12
        assert abs(p.alpha(1.0) - 1.0) < 1e-12
        assert p.omega(1.0) == 0.0
        assert p.delta(1.0) == 1.0

    def test_n1_reduction(self):
        p = make_grover(1)
        for s in (0.0, 0.25, 0.7, 1.0):
            assert p.delta(s) == pytest.approx(s, abs=1e-15)
            assert p.omega(s) == pytest.approx(s - 1.0, abs=1e-15)
        assert p.alpha(0.5) == pytest.approx(1.0 / math.sqrt(2), abs=1e-14)

    def test_minimum_gap(self):
        p = make_grover(10)
        res = minimize_scalar(p.alpha, bounds=(0.0, 1.0), method="bounded",
                              options={"xatol": 1e-12})
        assert abs(res.x - 0.5) < 1e-6
        assert abs(res.fun - 1.0 / 32) < 1e-12

    def test_gap_positivity_sampled(self):
        p = make_grover(10)
        floor = 1.0 / math.sqrt(p.N)
        s = np.linspace(0.0, 1.0, 10_001)
        alphas = np.hypot([p.delta(x) for x in s], [p.omega(x) for x in s])
        assert np.all(alphas >= floor - 1e-12)

    def test_alpha_identity(self):
        for p in (make_grover(4), make_single_site(0.3)):
            for s in np.linspace(0.0, 1.0, 17):
                assert p.alpha(s) == pytest.approx(
                    math.sqrt(p.delta(s) ** 2 + p.omega(s) ** 2), abs=1e-12)

    @pytest.mark.parametrize("bad", [0, 31, -3, 2.5, True, "8"])
    def test_invalid_n(self, bad):
        with pytest.raises(ConfigurationError):
            make_grover(bad)


class TestSingleSite:
    def test_matches_grover_reduction(self):
        g = make_grover(10)
        p = make_single_site(math.sqrt(1023.0 / 1024.0))
        for s in (0.0, 0.3, 0.7, 1.0):
            assert p.delta(s) == pytest.approx(g.delta(s), abs=1e-12)
            assert p.omega(s) == pytest.approx(g.omega(s), abs=1e-12)

    def test_balanced_amplitudes(self):
        p = make_single_site(math.sqrt(0.5))
        assert p.delta(0.0) == pytest.approx(0.0, abs=1e-15)
        assert p.omega(0.0) == pytest.approx(-1.0, abs=1e-15)
        assert p.alpha(0.0) == pytest.approx(1.0, abs=1e-14)
        assert p.delta(1.0) == 1.0
        assert p.omega(1.0) == 0.0

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.3, 1.5])
    def test_invalid_a0(self, bad):
        with pytest.raises(ConfigurationError):
            make_single_site(bad)


class TestSchedules:
    def test_linear_values(self):
        p = make_grover(10)
        spec = make_schedule("linear", 100.0, p)
        assert schedule_s(25.0, spec, p) == 0.25
        spec200 = make_schedule("linear", 200.0, p)
        for t in (0.0, 17.0, 200.0):
            assert schedule_sdot(t, spec200, p) == 0.005

    def test_optimal_endpoints(self):
        p = make_grover(10)
        for T in (100.0, 502.65, 2000.0):
            spec = make_schedule("optimal", T, p)
            assert abs(schedule_s(0.0, spec, p)) < 1e-12
            assert abs(schedule_s(T, spec, p) - 1.0) < 1e-9

    def test_optimal_monotone(self):
        p = make_grover(10)
        spec = make_schedule("optimal", 500.0, p)
        ts = np.linspace(0.0, 500.0, 301)
        svals = [schedule_s(t, spec, p) for t in ts]
        assert np.all(np.diff(svals) > 0.0)
        assert all(schedule_sdot(t, spec, p) > 0.0 for t in ts)

    def test_optimal_sdot_matches_finite_differences(self):
        p = make_grover(10)
        T = 500.0
        spec = make_schedule("optimal", T, p)
        h = 1e-6 * T
        for t in (0.1 * T, 0.5 * T, 0.9 * T):
            fd = (schedule_s(t + h, spec, p) - schedule_s(t - h, spec, p)) / (2 * h)
            assert schedule_sdot(t, spec, p) == pytest.approx(fd, rel=1e-6)

    def test_optimal_speedup_ratio(self):
        # ds/dt = eps * alpha^2, so midpoint/endpoint ratio is alpha_min^2 / 1
        p = make_grover(10)
        spec = make_schedule("optimal", 500.0, p)
        t_half = 0.5 * 500.0  # symmetric schedule: s = 1/2 at t = T/2
        assert schedule_s(t_half, spec, p) == pytest.approx(0.5, abs=1e-12)
        ratio = schedule_sdot(t_half, spec, p) / schedule_sdot(0.0, spec, p)
        assert ratio == pytest.approx(p.alpha(0.5) ** 2 / p.alpha(0.0) ** 2, rel=1e-10)

    def test_calibration_recovers_target_rate(self):
        # for T = pi sqrt(N) / (2 eps) the calibrated eps approaches the target
        p = make_grover(10)
        T = math.pi * math.sqrt(1024.0) / (2.0 * 0.1)
        eps = calibrate_epsilon(p, T)
        assert eps == pytest.approx(0.1, rel=0.05)

    def test_schedule_errors(self):
        p = make_grover(4)
        with pytest.raises(ConfigurationError):
            make_schedule("linear", 0.0, p)
        with pytest.raises(ConfigurationError):
            make_schedule("cubic", 10.0, p)
        with pytest.raises(ConfigurationError):
            make_schedule("optimal", 10.0, make_single_site(0.5))
        spec = make_schedule("linear", 10.0, p)
        with pytest.raises(DomainError):
            schedule_s(-1.0, spec, p)
        with pytest.raises(DomainError):
            schedule_sdot(10.5, spec, p)


class TestFrame:
    def test_trig_identities(self):
        p = make_grover(10)
        for s in np.linspace(0.0, 1.0, 21):
            f = frame(p, s, 0.0)
            assert f.c ** 2 + f.s_trig ** 2 == pytest.approx(1.0, abs=1e-12)
            assert f.e1 - f.e0 == pytest.approx(f.alpha, abs=1e-14)
            assert f.e2 == 1.0

    def test_endpoint_frame(self):
        f = frame(make_grover(10), 1.0, 0.0)
        assert f.c == pytest.approx(-1.0, abs=1e-14)
        assert f.s_trig == pytest.approx(0.0, abs=1e-14)

    def test_midpoint_c(self):
        f = frame(make_grover(10), 0.5, 0.0)
        assert abs(f.c) == pytest.approx((1.0 / 1024) / (1.0 / 32), abs=1e-12)

    def test_sqrt_formula_oracle(self):
        # away from the Delta + alpha -> 0 singularity the square-root
        # eigenvector formulas must reproduce c and s_trig
        p = make_grover(10)
        for s in (0.6, 0.75, 0.9, 1.0):
            f = frame(p, s, 0.0)
            sin_t = math.sqrt((f.delta + f.alpha) / (2.0 * f.alpha))
            cos_t = -f.omega / math.sqrt(2.0 * f.alpha * (f.alpha + f.delta))
            assert cos_t ** 2 - sin_t ** 2 == pytest.approx(f.c, abs=1e-10)
            assert 2.0 * sin_t * cos_t == pytest.approx(f.s_trig, abs=1e-10)

    def test_theta_dot_finite_differences(self):
        p = make_grover(10)
        sdot = 0.37
        h = 1e-6
        for s in (0.1, 0.5, 0.9):
            f = frame(p, s, sdot)
            dtheta = (frame(p, s + h, 0.0).theta - frame(p, s - h, 0.0).theta) / (2 * h)
            assert f.theta_dot == pytest.approx(dtheta * sdot, rel=1e-5)

    def test_adiabatic_bound_scale(self):
        # dominated by the avoided crossing: element/alpha^2 ~ N there
        bound = adiabatic_time_bound(make_grover(10))
        assert 100.0 < bound < 1e5
        assert adiabatic_time_bound(make_grover(1)) < 10.0
