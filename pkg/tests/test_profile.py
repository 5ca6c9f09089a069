import math
import time

import numpy as np
import pytest

from collarforge.errors import MalformedInputError
from collarforge.geometry import observed_order, quasilocal_mass
from collarforge.profile import horizon_radius, proper_length, reversed_profile, solve_profile


@pytest.mark.parametrize("m, n, expected", [(0.5, 3, 1.0), (0.5, 4, 1.0), (1.0, 3, 2.0)])
def test_horizon_radius(m, n, expected):
    assert horizon_radius(m, n) == pytest.approx(expected, rel=1e-15)


def test_horizon_radius_needs_positive_mass():
    with pytest.raises(MalformedInputError):
        horizon_radius(0.0, 3)


def test_proper_length_closed_forms():
    start = time.perf_counter()
    a = proper_length(0.5, 2.0, 3)
    b = proper_length(0.5, 2.0, 4)
    assert time.perf_counter() - start < 0.1
    assert a == pytest.approx(math.sqrt(2) + math.log(1 + math.sqrt(2)), abs=1e-8)
    assert b == pytest.approx(math.sqrt(3), abs=1e-8)


def test_proper_length_closed_form_general_r():
    # n = 3, m = 1/2: s(r) = sqrt(r (r-1)) + arccosh(sqrt(r))
    for r in (1.01, 1.5, 7.0, 40.0):
        assert proper_length(0.5, r, 3) == pytest.approx(math.sqrt(r * (r - 1)) + math.acosh(math.sqrt(r)), rel=1e-11)


def test_proper_length_vanishes_at_horizon():
    assert proper_length(0.5, 1.0 + 1e-10, 3) < 1e-4


def test_boundary_inside_horizon():
    with pytest.raises(MalformedInputError, match="inside horizon"):
        proper_length(0.5, 1.0, 3)
    with pytest.raises(MalformedInputError):
        solve_profile(0.5, 0.5, 3)


def test_taylor_start():
    prof = solve_profile(0.5, 2.0, 3)
    assert prof.u_at(0.1) == pytest.approx(1.0025, abs=1e-5)
    assert prof.du[-1] == pytest.approx(math.sqrt(0.5), abs=1e-12)


@pytest.mark.parametrize("n", range(3, 8))
@pytest.mark.parametrize("m", [0.1, 0.4])
def test_profile_invariants(n, m):
    r_o = 2.0 * horizon_radius(m, n)
    prof = solve_profile(m, r_o, n)
    assert prof.u[0] == prof.r_m and prof.du[0] == 0.0
    assert np.all(np.diff(prof.u) > 0)
    assert np.all(prof.du[1:] > 0) and np.all(prof.du < 1)
    assert abs(prof.u[-1] - r_o) <= 1e-8 * r_o
    assert prof.first_integral_residual <= 1e-10
    assert prof.first_order_residual <= 1e-8
    assert np.max(np.abs(quasilocal_mass(prof.u, prof.du, n) - m)) <= 1e-8
    # two independent routes to s_o
    assert prof.s_o == pytest.approx(proper_length(m, r_o, n), abs=1e-8)


def test_second_derivative_consistency():
    prof = solve_profile(0.5, 3.0, 3)
    target = lambda s: (prof.n - 2) * prof.m / prof.u_at(s) ** (prof.n - 1)
    s = np.linspace(0.4, prof.s_o - 0.4, 7)
    steps = [0.08, 0.04, 0.02]
    errors = [np.max(np.abs((prof.u_at(s + h) - 2 * prof.u_at(s) + prof.u_at(s - h)) / h**2 - target(s)))
              for h in steps]
    assert observed_order(steps, errors) >= 1.9


def test_reversed_profile():
    prof = solve_profile(0.5, 2.0, 3)
    view = reversed_profile(prof)
    assert view.v_at(0.0) == pytest.approx(2.0, abs=1e-12)
    assert view.v_at(prof.s_o) == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.diff(view.v) < 0)
    assert view.v_at(prof.s_o - 0.1) == pytest.approx(1.0025, abs=1e-5)
    assert view.lapse_factor_at(prof.s_o) == 0.0
    assert view.lapse_factor_at(0.0) == pytest.approx(0.5, abs=1e-12)


def test_sample_count_and_csv_rows():
    prof = solve_profile(0.5, 2.0, 3, samples=64)
    assert prof.as_rows().shape == (65, 3)
    with pytest.raises(MalformedInputError):
        solve_profile(0.5, 2.0, 3, samples=4)


def test_out_of_range_evaluation():
    prof = solve_profile(0.5, 2.0, 3, samples=64)
    with pytest.raises(MalformedInputError):
        prof.u_at(prof.s_o + 0.1)
