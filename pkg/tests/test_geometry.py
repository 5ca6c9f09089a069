import math

import numpy as np
import pytest

from collarforge.errors import MalformedInputError, SingularMetricError
from collarforge.geometry import (
    RoundFiber,
    WarpedMetricSample,
    area_radius,
    check_dim,
    observed_order,
    quasilocal_mass,
    sphere_area,
    unit_sphere_area,
    warped_scalar_curvature,
    warped_scalar_curvature_fd,
)
from collarforge.profile import solve_profile


@pytest.mark.parametrize("n, expected", [(3, 4 * math.pi), (4, 2 * math.pi**2), (5, 8 * math.pi**2 / 3)])
def test_unit_sphere_area_closed_forms(n, expected):
    assert unit_sphere_area(n) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("n", range(3, 8))
def test_unit_sphere_area_matches_stdlib_gamma(n):
    assert unit_sphere_area(n) == pytest.approx(2 * math.pi ** (n / 2) / math.gamma(n / 2), rel=1e-14)


@pytest.mark.parametrize("n", [5, 6, 7])
def test_unit_sphere_area_recursion(n):
    assert unit_sphere_area(n) == pytest.approx(2 * math.pi * unit_sphere_area(n - 2) / (n - 2), rel=1e-14)


@pytest.mark.parametrize("n", [2, 8, 3.5, True])
def test_dimension_out_of_range(n):
    with pytest.raises(MalformedInputError):
        check_dim(n)


@pytest.mark.parametrize("area, n, expected", [(16 * math.pi, 3, 2.0), (4 * math.pi, 3, 1.0), (2 * math.pi**2, 4, 1.0)])
def test_area_radius_examples(area, n, expected):
    assert area_radius(area, n) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("n", range(3, 8))
def test_area_radius_roundtrip(n):
    for r in np.geomspace(1e-3, 1e3, 13):
        assert area_radius(sphere_area(r, n), n) == pytest.approx(r, rel=1e-12)


def test_area_radius_rejects_nonpositive():
    with pytest.raises(MalformedInputError):
        area_radius(0.0, 3)


@pytest.mark.parametrize("f, fp, n, expected", [(2.0, math.sqrt(0.5), 3, 0.5), (1.0, 0.0, 3, 0.5), (5.0, 1.0, 4, 0.0)])
def test_quasilocal_mass_examples(f, fp, n, expected):
    assert quasilocal_mass(f, fp, n) == pytest.approx(expected, abs=1e-15)


def test_quasilocal_mass_negative_is_returned():
    assert quasilocal_mass(1.0, 2.0, 3) < 0


def test_warped_sample_rejects_singular():
    with pytest.raises(SingularMetricError):
        WarpedMetricSample(0.0, 0.0, 1.0)
    with pytest.raises(SingularMetricError):
        WarpedMetricSample(0.0, 1.0, -1.0)


def _round_angles(count, k):
    x = np.full((count, k), 0.5 * math.pi)
    x[:, 0] = np.linspace(0.7, 2.4, count)
    x[:, -1] = 0.3
    return x


def test_fd_flat_polar_is_zero():
    s = np.linspace(1.0, 3.0, 5)
    r = warped_scalar_curvature_fd(1.0, lambda t: t, RoundFiber(2), s, _round_angles(5, 2), h=1e-3)
    assert np.max(np.abs(r)) < 1e-5


def test_fd_schwarzschild_is_scalar_flat():
    prof = solve_profile(0.5, 3.0, 3)
    s = np.linspace(0.5, prof.s_o - 0.5, 5)
    r = warped_scalar_curvature_fd(1.0, lambda t: prof.u_at(t), RoundFiber(2), s, _round_angles(5, 2), h=1e-3)
    assert np.max(np.abs(r)) < 1e-5


def test_fd_round_cylinder_converges_at_second_order():
    c = 1.7
    steps = [0.08, 0.04, 0.02]
    errors = []
    for h in steps:
        r = warped_scalar_curvature_fd(1.0, lambda t: np.full(np.shape(t), c), RoundFiber(2), [0.0],
                                       _round_angles(1, 2), h=h)
        errors.append(abs(r[0] - 2 / c**2))
    assert observed_order(steps, errors) >= 1.9


@pytest.mark.parametrize("n", [3, 5, 7])
def test_fd_matches_warped_closed_form(n):
    f = lambda t: 1.0 + 0.3 * np.sin(t)
    s0 = 0.4
    closed = warped_scalar_curvature(f(s0), 0.3 * math.cos(s0), -0.3 * math.sin(s0), n)
    fd = warped_scalar_curvature_fd(1.0, f, RoundFiber(n - 1), [s0], _round_angles(1, n - 1), h=2e-3)
    assert fd[0] == pytest.approx(closed, abs=1e-4)


def test_fd_rejects_nonpositive_step():
    with pytest.raises(MalformedInputError):
        warped_scalar_curvature_fd(1.0, lambda t: t, RoundFiber(2), [1.0], _round_angles(1, 2), h=0.0)
