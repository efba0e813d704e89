#!/usr/bin/env python3
"""
Tests for the alternate reductions: Fujita form, separated ODE, unity
convolution, linear ansatz and Neumann series
"""
import sys

import numpy as np
import pytest
from scipy.special import erf, erfinv

from alternates import (
    SeparatedPoleError,
    check_linear_ansatz,
    check_unity_convolution,
    fujita_convergence_order,
    fujita_step,
    integrate_fujita,
    locate_series_argument,
    neumann_series_check,
    separated_blow_up_time,
    separated_rk4,
    separated_solution,
    separated_state,
    series_argument,
    unity_convolution,
)
from codomain import branch_points
from fields import Grid, SpectralField
from kernels import NwsParams, spectral_kernel
from reports import Verdict

PARAMS = NwsParams(nu=1.0, alpha=1.0, epsilon=1.0, n=2)
SGRID = Grid(256, 32.0).dual()


def test_zero_is_a_fixed_point_of_the_fujita_form():
    zero = SpectralField(SGRID, np.zeros(256))
    run = integrate_fujita(zero, 1.0, 0.01, PARAMS)
    assert not run.blow_up
    assert len(run.times) == 101
    assert run.final.sup_norm() == 0.0
    assert run.final.time_stamp == pytest.approx(1.0)


def test_fujita_step_validation():
    zero = SpectralField(SGRID, np.zeros(256))
    with pytest.raises(ValueError):
        fujita_step(zero, 0.0, 0.0, PARAMS)
    with pytest.raises(ValueError):
        integrate_fujita(zero, 0.0, 0.01, PARAMS)


def test_fujita_midpoint_is_second_order():
    F0 = SpectralField.from_function(SGRID, lambda s: 0.1 * np.exp(-4.0 * np.pi * s ** 2))
    ratio = fujita_convergence_order(F0, 0.2, 0.005, PARAMS)
    assert 3.5 <= ratio <= 4.5


def test_fujita_blow_up_truncates_run():
    F0 = SpectralField.from_function(SGRID, lambda s: 1e11 * np.exp(-np.pi * s ** 2))
    run = integrate_fujita(F0, 1.0, 0.01, PARAMS)
    assert run.blow_up
    assert run.blow_up_time == 0.0
    assert run.final is F0


def test_separated_closed_form_value():
    state = separated_state(1.0, PARAMS)
    assert state.blow_up_time is None
    assert separated_solution(1.0, state, PARAMS) == pytest.approx(1.0 / (1.0 - erf(1.0) / 4.0), rel=1e-14)


def test_separated_closed_form_solves_the_ode():
    state = separated_state(1.0, PARAMS)
    t, h = 0.5, 1e-6
    derivative = (separated_solution(t + h, state, PARAMS) - separated_solution(t - h, state, PARAMS)) / (2 * h)
    value = separated_solution(t, state, PARAMS)
    rate = np.exp(-t) / (4.0 * np.sqrt(np.pi * t)) * value ** 2
    assert derivative == pytest.approx(rate, rel=1e-7)


def test_separated_rk4_agrees_with_closed_form():
    times = np.linspace(0.01, 3.0, 31)
    for h0 in (0.5, 1.0, 3.0):
        state = separated_state(h0, PARAMS)
        numeric = separated_rk4(state, times, PARAMS)
        closed = np.array([separated_solution(t, state, PARAMS) for t in times])
        assert np.max(np.abs(numeric - closed)) < 1e-8


def test_separated_blow_up_time():
    assert separated_blow_up_time(3.0, PARAMS) is None
    assert separated_blow_up_time(-5.0, PARAMS) is None
    t_star = separated_blow_up_time(5.0, PARAMS)
    assert t_star == pytest.approx(erfinv(0.8) ** 2, rel=1e-12)
    assert t_star == pytest.approx(0.8212, abs=1e-4)
    state = separated_state(5.0, PARAMS)
    assert separated_solution(0.5 * t_star, state, PARAMS) > 5.0
    with pytest.raises(SeparatedPoleError):
        separated_solution(t_star, state, PARAMS)


def test_unity_convolution_of_gaussian():
    sgrid = Grid(256, 16.0).dual()
    H = SpectralField.from_function(sgrid, lambda s: np.exp(-np.pi * s ** 2))
    assert unity_convolution(H) == pytest.approx(1.0, abs=1e-10)
    report = check_unity_convolution(H)
    assert report.verdict == Verdict.SUPPORTED
    assert report.metadata["decay_warning"] is False


def test_unity_convolution_of_spectral_kernel():
    H = SpectralField.from_function(SGRID, lambda s: spectral_kernel(s, 1.0, PARAMS), 1.0)
    assert unity_convolution(H) == pytest.approx(1.0 / np.sqrt(4.0 * np.pi), abs=1e-8)


def test_unity_convolution_flags_undecayed_input():
    H = SpectralField(SGRID, np.ones(256))
    report = check_unity_convolution(H)
    assert report.metadata["decay_warning"] is True


def test_linear_ansatz_leaves_the_nonlinear_term():
    grid = Grid(256, 32.0)
    report = check_linear_ansatz(1.0, None, PARAMS, grid, [0.5])
    expected = (np.exp(-0.5) / np.sqrt(2.0 * np.pi)) ** 2
    assert report.metadata["nonlinear_term"] == pytest.approx(expected, rel=1e-10)
    assert report.residual == pytest.approx(expected, rel=1e-8)
    assert report.verdict == Verdict.REFUTED


def test_linear_ansatz_null_amplitude_is_trivial():
    grid = Grid(256, 32.0)
    report = check_linear_ansatz(0.0, None, PARAMS, grid, [0.25, 0.5])
    assert report.residual == 0.0
    assert report.verdict == Verdict.SUPPORTED
    with pytest.raises(ValueError):
        check_linear_ansatz(1.0, None, PARAMS, grid, [])


def test_neumann_series_converges_below_unity():
    s = 1.5 * branch_points(PARAMS).s_star
    t = locate_series_argument(PARAMS, s, 0.5, t_max=5.0)
    assert abs(series_argument(PARAMS, s, t)) == pytest.approx(0.5, rel=1e-10)
    report = neumann_series_check(PARAMS, s, t, 20)
    assert report.metadata["converges"] is True
    assert report.metadata["decay_rate"] == pytest.approx(0.5, rel=1e-6)
    assert report.verdict == Verdict.SUPPORTED


def test_neumann_series_diverges_beyond_unity():
    s = 2.0 * branch_points(PARAMS).s_star
    t = locate_series_argument(PARAMS, s, 2.0, t_max=5.0)
    report = neumann_series_check(PARAMS, s, t, 20)
    assert report.metadata["converges"] is False
    assert report.metadata["tail_bound"] is None
    assert report.verdict == Verdict.REFUTED


def test_neumann_series_validation():
    with pytest.raises(ValueError):
        neumann_series_check(PARAMS.replace(n=3), 0.5, 1.0, 20)
    with pytest.raises(ValueError):
        neumann_series_check(PARAMS, 0.5, 1.0, 0)
    with pytest.raises(ValueError):
        locate_series_argument(PARAMS, 0.0, 0.5, t_max=5.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
