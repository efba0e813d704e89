#!/usr/bin/env python3
"""
Tests for the codomain pipeline: erf closed form, Bernoulli solution, inversion
"""
import sys
import warnings

import numpy as np
import pytest

from codomain import (
    BernoulliPoleError,
    _judge_pointwise,
    bernoulli_integrand,
    bernoulli_ode_residual,
    branch_points,
    check_bernoulli_exactness,
    closed_form_n2,
    erf_ratio,
    general_solution,
    general_solution_with_error,
    invert_solution,
    measure_ode_residual,
    sweep_spectrum,
    time_integral,
    verify_erf_formula,
)
from fields import Grid, discrete_delta
from kernels import KernelDomainError, NwsParams, heat_kernel, spectral_kernel
from reports import Verdict, make_report

PARAMS = NwsParams(nu=1.0, alpha=1.0, epsilon=1.0, n=2)
S_STAR = 0.2250790790392765


def test_branch_point_and_prose_value():
    branch = branch_points(PARAMS)
    assert branch.s_star == pytest.approx(S_STAR, rel=1e-14)
    assert branch.prose_value == pytest.approx(1.0 / np.pi, rel=1e-14)
    assert branch.prose_ratio == pytest.approx(np.sqrt(2.0), rel=1e-14)


def test_erf_ratio_at_origin():
    from scipy.special import erf
    assert erf_ratio(0.0, 1.0, PARAMS) == pytest.approx(erf(1.0) / (2.0 * np.sqrt(2.0)), rel=1e-14)
    assert closed_form_n2(0.0, 1.0, PARAMS) == pytest.approx(0.77045, abs=1e-5)


def test_erf_ratio_is_continuous_across_branch_point():
    at = erf_ratio(S_STAR, 1.0, PARAMS)
    assert at == pytest.approx(1.0 / np.sqrt(2.0 * np.pi), rel=1e-8)
    for s in (S_STAR * (1 - 1e-6), S_STAR * (1 + 1e-6)):
        assert erf_ratio(s, 1.0, PARAMS) == pytest.approx(at, rel=1e-5)


def test_erf_ratio_matches_quadrature_on_both_sides():
    for s in (0.0, 0.1, S_STAR, 0.5, 1.0):
        for t in (0.25, 1.0):
            quad = time_integral(s, t, PARAMS)
            assert erf_ratio(s, t, PARAMS) == pytest.approx(quad.value, rel=1e-10)


def test_verify_erf_formula_supported():
    report = verify_erf_formula(PARAMS, [0.0, 0.1, S_STAR, 0.5, 1.0], [0.25, 1.0])
    assert report.verdict == Verdict.SUPPORTED
    assert report.metadata["s_star"] == pytest.approx(S_STAR)
    with pytest.raises(ValueError):
        verify_erf_formula(PARAMS.replace(n=3), [0.0], [1.0])


def test_general_solution_matches_closed_form():
    for s in (0.0, 0.2, 0.6):
        assert general_solution(s, 1.0, PARAMS) == pytest.approx(closed_form_n2(s, 1.0, PARAMS), rel=1e-10)
    assert general_solution_with_error(0.3, 1.0, PARAMS.replace(epsilon=0.0)) == (1.0, 0.0)


def test_solution_lies_in_unit_interval():
    s = np.linspace(-2.0, 2.0, 81)
    for t in np.linspace(0.05, 3.0, 20):
        F = closed_form_n2(s, t, PARAMS)
        assert np.all(F > 0.0) and np.all(F <= 1.0)


def test_solution_decays_beyond_twice_the_branch_point():
    s = np.linspace(2.0 * S_STAR, 2.0, 200)
    for t in (0.05, 0.5, 1.0, 3.0):
        assert np.all(np.diff(closed_form_n2(s, t, PARAMS)) < 0.0)


def test_negative_epsilon_crosses_the_pole():
    params = PARAMS.replace(epsilon=-1.0)
    assert closed_form_n2(0.0, 1.0, params) > 1.0
    assert closed_form_n2(1.0, 1.0, params) < 0.0


def test_divergent_integral_for_higher_powers():
    params = PARAMS.replace(n=3)
    assert time_integral(0.1, 1.0, params).value == float("inf")
    assert general_solution(0.1, 1.0, params) == 0.0
    with pytest.raises(BernoulliPoleError):
        general_solution(0.1, 1.0, params.replace(epsilon=-1.0))


def test_time_integral_domain():
    with pytest.raises(ValueError):
        time_integral(0.0, 1.0, PARAMS, t0=1.0)
    with pytest.raises(KernelDomainError):
        time_integral(0.0, 0.0, PARAMS)


def test_grid_integrand_matches_closed_gaussian_algebra():
    params = PARAMS.replace(n=3)
    sgrid = Grid(256, 32.0).dual()
    s = sgrid.frequencies[sgrid.origin_index - 4: sgrid.origin_index + 5]
    closed = bernoulli_integrand(s, 0.5, params)
    on_grid = bernoulli_integrand(s, 0.5, params, sgrid=sgrid)
    assert np.max(np.abs(on_grid / closed - 1.0)) < 1e-10

    sgrid = Grid(512, 32.0).dual()
    s = sgrid.frequencies[sgrid.origin_index - 8: sgrid.origin_index + 9]
    closed = bernoulli_integrand(s, 1.0, PARAMS)
    on_grid = bernoulli_integrand(s, 1.0, PARAMS, sgrid=sgrid)
    assert np.max(np.abs(on_grid - closed)) < 1e-7


def test_grid_integrand_masks_underflowed_kernel():
    sgrid = Grid(512, 32.0).dual()
    # g(s, 1) underflows for |s| above about 4.2, well inside the Nyquist band
    assert spectral_kernel(sgrid.nyquist, 1.0, PARAMS) == 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        values = bernoulli_integrand(sgrid.frequencies, 1.0, PARAMS, sgrid=sgrid)
    assert np.all(np.isfinite(values))


def test_ode_residual_vanishes_with_derived_sign():
    measured = measure_ode_residual(PARAMS, 0.3, 1.0)
    assert measured.residual < 1e-6
    assert measured.printed_sign_residual > 1e-3


def test_ode_residual_higher_power_from_positive_start():
    measured = measure_ode_residual(PARAMS.replace(n=3), 0.2, 0.5, t0=0.1)
    assert measured.residual < 1e-6
    with pytest.raises(ValueError):
        measure_ode_residual(PARAMS.replace(n=3), 0.2, 0.1, t0=0.1)


def test_bernoulli_exactness_report():
    report = check_bernoulli_exactness(PARAMS, [0.0, 0.3], [0.5, 1.0])
    assert report.residual < 1e-6
    assert report.metadata["printed_sign_residual"] > report.residual


def test_bernoulli_ode_residual_is_second_order_in_step():
    coarse = bernoulli_ode_residual(PARAMS, 0.3, 1.0, h=2e-2)
    fine = bernoulli_ode_residual(PARAMS, 0.3, 1.0, h=1e-2)
    assert fine > 0.0
    assert 3.8 < coarse / fine < 4.2


def test_pointwise_judgement_uses_each_points_own_error():
    points = [(1e-3, 1e-3, (0.0, 1.0)), (1e-6, 1e-9, (1.0, 1.0))]
    residual, error, summary = _judge_pointwise(points)
    assert (residual, error) == (1e-6, 1e-9)
    assert summary["worst_at"] == [1.0, 1.0]
    assert summary["worst_residual"] == 1e-3
    assert summary["worst_ratio"] == pytest.approx(1e3)
    assert make_report("c", "ref", residual, error).verdict == Verdict.REFUTED


def test_lattice_reports_carry_the_worst_ratio():
    report = check_bernoulli_exactness(PARAMS, [0.0, 0.3], [0.5, 1.0])
    ratio = report.metadata["worst_ratio"]
    assert ratio == pytest.approx(report.residual / report.error_estimate)
    assert report.metadata["worst_residual"] >= report.residual
    assert (report.verdict == Verdict.SUPPORTED) == (ratio <= 10.0)
    report = verify_erf_formula(PARAMS, [0.0, S_STAR, 0.5], [0.25, 1.0])
    assert report.metadata["worst_ratio"] <= 10.0
    assert report.verdict == Verdict.SUPPORTED


def test_inversion_pipeline_recovers_heat_kernel():
    grid = Grid(256, 32.0)
    t = 1.0
    field, quad, report = invert_solution(
        PARAMS, t, grid, spectrum=lambda s: spectral_kernel(s, t, PARAMS)
    )
    assert np.max(np.abs(field.values - heat_kernel(grid.points, t, PARAMS))) < 1e-7
    assert report.metadata["calibration"] is True


def test_null_inverse_transform_is_refuted():
    grid = Grid(256, 32.0)
    field, quad, report = invert_solution(PARAMS, 1.0, grid)
    assert report.verdict == Verdict.REFUTED
    assert report.metadata["truncated_at_nyquist"] is False
    assert report.residual == pytest.approx(report.metadata["integral_F"], rel=1e-12)
    assert quad.error_estimate < 1e-8 * report.metadata["integral_F"] / 2.0


def test_inversion_without_nonlinearity_is_the_discrete_delta():
    grid = Grid(256, 32.0)
    field, _, report = invert_solution(PARAMS.replace(epsilon=0.0), 1.0, grid)
    assert report.metadata["truncated_at_nyquist"] is True
    assert np.max(np.abs(field.values - discrete_delta(grid).values)) < 1e-12


def test_sweep_without_nonlinearity_is_flat():
    rows = sweep_spectrum(PARAMS.replace(epsilon=0.0), 1.0, [0.0, 0.5, 1.0])
    assert [row[2] for row in rows] == [1.0, 1.0, 1.0]
    assert all(row[1] == 1.0 for row in rows)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
