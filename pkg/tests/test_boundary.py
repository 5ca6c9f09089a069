import math

import numpy as np
import pytest

from collarforge.boundary import (
    AxisymS2Data,
    HomogeneousData,
    TabulatedData,
    Verdict,
    boundary_data_from_json,
    check_cmc_condition,
    check_laplacian_condition,
    collar_parameters,
    laplace_beltrami,
    laplacian_margin_field,
    round_sphere_data,
    schwarzschild_sphere_data,
    theta,
)
from collarforge.errors import InadmissibleDataError, MalformedInputError
from collarforge.geometry import observed_order

from generators import perturbed_round


def schwarzschild_example():
    return HomogeneousData(3, 16 * math.pi, 0.5, math.sqrt(0.5))


def p2(x):
    return 0.5 * (3 * x * x - 1)


# --- Laplace-Beltrami --------------------------------------------------------


@pytest.mark.parametrize("grid", ["cell", "vertex"])
def test_laplacian_kills_constants_exactly(grid):
    data = AxisymS2Data.from_functions(64, lambda t: 1.0 + 0 * t, conformal_factor=lambda t: 0.1 * np.cos(t),
                                       grid=grid)
    assert np.all(laplace_beltrami(data, np.full(64, 3.7)).values == 0.0)
    assert np.all(schwarzschild_example().laplacian(np.array([2.0])) == 0.0)


@pytest.mark.parametrize("grid", ["cell", "vertex"])
@pytest.mark.parametrize("ell, fn", [(1, np.cos), (2, lambda t: p2(np.cos(t)))])
def test_laplacian_eigenfunctions_second_order(grid, ell, fn):
    errors, steps = [], []
    for samples in (64, 128, 256):
        data = AxisymS2Data.from_functions(samples, lambda t: 1.0 + 0 * t, grid=grid)
        f = fn(data.theta)
        errors.append(np.max(np.abs(data.laplacian(f) + ell * (ell + 1) * f)))
        steps.append(math.pi / samples)
    assert errors[-1] < 1e-3
    assert observed_order(steps, errors) >= 1.9


def test_laplacian_integrates_to_zero():
    data = AxisymS2Data.from_functions(96, lambda t: 1.0 + 0 * t, conformal_factor=lambda t: 0.2 * np.cos(2 * t),
                                       radius=1.5)
    f = np.exp(np.sin(3 * data.theta))
    assert abs(data.integrate(data.laplacian(f))) < 1e-12


def test_gauss_bonnet_is_discrete_exact():
    data = AxisymS2Data.from_functions(50, lambda t: 1.0 + 0 * t,
                                       conformal_factor=lambda t: 0.1 * np.cos(t) - 0.05 * np.cos(2 * t), radius=2.0)
    assert data.integrate(data.R_g) == pytest.approx(8 * math.pi, rel=1e-13)


def test_round_curvature_and_area():
    data = AxisymS2Data.from_functions(40, lambda t: 1.0 + 0 * t, radius=2.0)
    assert np.allclose(data.R_g, 0.5, atol=1e-14)
    assert data.area == pytest.approx(16 * math.pi, rel=1e-14)
    assert data.r_o == pytest.approx(2.0, rel=1e-14)


def test_tabulated_laplacian_only_for_inverse_h():
    data = TabulatedData(3, 16 * math.pi, [0.5, 0.6, 0.55], [0.7, 0.72, 0.71], lap_H_inv=[0.01, -0.01, 0.0])
    assert np.allclose(data.lap_inverse_H(), [0.01, -0.01, 0.0])
    assert np.all(data.laplacian(np.ones(3)) == 0)
    # the lapse A is proportional to 1/H, so its Laplacian is available
    assert np.allclose(data.laplacian(3.0 / data.H), 3.0 * data.lap_H_inv)
    with pytest.raises(MalformedInputError):
        data.laplacian(np.array([1.0, 5.0, 2.0]))


def test_misaligned_field_rejected():
    data = perturbed_round(32)
    with pytest.raises(MalformedInputError):
        laplace_beltrami(data, np.ones(31))


# --- admissibility -----------------------------------------------------------


def test_cmc_condition_examples():
    adm = check_cmc_condition(schwarzschild_example())
    assert adm.verdict is Verdict.ADMISSIBLE and adm.margin == pytest.approx(0.25, abs=1e-15)
    flat = round_sphere_data(3, 2.0, 1.0)
    adm = check_cmc_condition(flat)
    assert adm.verdict is Verdict.EQUALITY and abs(adm.margin) < 1e-12
    adm = check_cmc_condition(HomogeneousData(3, 4 * math.pi, 2.0, 0.0))
    assert adm.ok and adm.margin == 2.0


@pytest.mark.parametrize("n", range(3, 8))
def test_flat_round_sphere_is_equality_in_every_dimension(n):
    data = round_sphere_data(n, 1.3, (n - 1) / 1.3)
    assert check_cmc_condition(data).verdict is Verdict.EQUALITY
    assert check_laplacian_condition(data).verdict is Verdict.EQUALITY


def test_negative_h_requires_review():
    data = TabulatedData(3, 4 * math.pi, [2.0, 2.0], [0.1, -0.1])
    assert check_cmc_condition(data).verdict is Verdict.REQUIRES_POSITIVE_H


def test_laplacian_condition_matches_cmc_on_homogeneous():
    data = schwarzschild_example()
    a, b = check_cmc_condition(data), check_laplacian_condition(data)
    assert a.verdict == b.verdict and a.margin == b.margin


def test_laplacian_condition_h_zero_sample():
    data = TabulatedData(3, 4 * math.pi, [2.0, 2.0], [0.3, 0.0])
    assert check_laplacian_condition(data).verdict is Verdict.REQUIRES_POSITIVE_H


def _perturbed_margin_exact(t, h0=0.7, eps=0.05, r=2.0):
    """R_g - 2 H Delta(1/H) - H^2/2 for H = h0 (1 + eps cos t) on the round sphere of radius r."""
    c, s = np.cos(t), np.sin(t)
    h = h0 * (1 + eps * c)
    lap = (2 * eps * c / (h0 * (1 + eps * c) ** 2) + 2 * eps**2 * s**2 / (h0 * (1 + eps * c) ** 3)) / r**2
    return 2 / r**2 - 2 * h * lap - 0.5 * h**2


def test_perturbed_margin_matches_dense_closed_form():
    data = perturbed_round(512)
    adm = check_laplacian_condition(data)
    dense = np.linspace(0, math.pi, 10 * 512 + 1)
    assert adm.ok
    assert adm.margin == pytest.approx(_perturbed_margin_exact(dense).min(), abs=1e-6)


def test_margin_converges_at_second_order():
    steps, errors = [], []
    for samples in (64, 128, 256):
        data = perturbed_round(samples)
        errors.append(np.max(np.abs(laplacian_margin_field(data) - _perturbed_margin_exact(data.theta))))
        steps.append(math.pi / samples)
    assert observed_order(steps, errors) >= 1.9


def test_edge_witness_is_flagged():
    adm = check_laplacian_condition(perturbed_round(128))
    assert adm.witness == 0
    assert any("refine" in note for note in adm.notes)


def test_cmc_zero_samples_noted():
    data = TabulatedData(3, 16 * math.pi, [0.5, 0.5], [0.5, 0.0])
    adm = check_cmc_condition(data)
    assert adm.ok and any("vanishes" in note for note in adm.notes)


# --- theta and collar parameters -----------------------------------------------


def test_theta_examples():
    data = schwarzschild_example()
    assert theta(data, "cmc") == pytest.approx(0.5, abs=1e-15)
    assert theta(data, "laplacian") == theta(data, "cmc")
    assert theta(HomogeneousData(3, 16 * math.pi, 0.5, 0.0), "cmc") == 0.0


def test_theta_rejects_inadmissible():
    with pytest.raises(InadmissibleDataError) as info:
        theta(round_sphere_data(3, 2.0, 1.0), "cmc")
    assert info.value.admissibility.verdict is Verdict.EQUALITY
    with pytest.raises(MalformedInputError):
        theta(schwarzschild_example(), "other")


def test_cmc_theta_uses_max_h():
    data = perturbed_round(128)
    expected = 0.5 * (0.7 * (1 + 0.05 * math.cos(data.theta[0]))) ** 2 / 0.5
    assert theta(data, "cmc") == pytest.approx(expected, rel=1e-14)


def test_collar_parameter_examples():
    m, a = collar_parameters(schwarzschild_example(), 0.5)
    assert m == pytest.approx(0.5, abs=1e-15) and np.allclose(a.values, 1.0, atol=1e-15)
    m, a = collar_parameters(schwarzschild_example(), 0.0)
    assert m == pytest.approx(1.0) and a is None
    data = HomogeneousData(4, 2 * math.pi**2, 6.0, 1.0)
    m, _ = collar_parameters(data, 0.75)
    assert m == pytest.approx(0.125, abs=1e-15)
    with pytest.raises(InadmissibleDataError):
        collar_parameters(data, 1.0)


@pytest.mark.parametrize("lam", [0.5, 3.0])
def test_scaling(lam):
    for data in (schwarzschild_example(), perturbed_round(64),
                 TabulatedData(3, 16 * math.pi, [0.5, 0.55], [0.7, 0.69], lap_H_inv=[0.02, -0.02])):
        scaled = data.scaled(lam)
        for mode in ("cmc", "laplacian"):
            t0, t1 = theta(data, mode), theta(scaled, mode)
            assert t1 == pytest.approx(t0, abs=1e-12)
            m0, a0 = collar_parameters(data, t0, mode)
            m1, a1 = collar_parameters(scaled, t1, mode)
            assert m1 == pytest.approx(lam ** (data.n - 2) * m0, rel=1e-12)
            assert np.allclose(a1.values, a0.values, rtol=1e-12)


def test_schwarzschild_sphere_data_values():
    data = schwarzschild_sphere_data(3, 0.5, 2.0)
    assert data.R_g[0] == pytest.approx(0.5) and data.H[0] == pytest.approx(math.sqrt(0.5))


# --- JSON --------------------------------------------------------------------


@pytest.mark.parametrize("make", [schwarzschild_example, lambda: perturbed_round(16),
                                  lambda: TabulatedData(4, 3.0, [5.0, 6.0], [1.0, 1.2], lap_H_inv=[0.1, -0.1])])
def test_json_roundtrip(make):
    data = make()
    again = boundary_data_from_json(data.to_json())
    assert type(again) is type(data)
    assert again.area == pytest.approx(data.area, rel=1e-14)
    assert np.allclose(again.R_g, data.R_g) and np.allclose(again.H, data.H)


@pytest.mark.parametrize("doc", [[], {"backend": "homogeneous"}, {"n": 3, "backend": "mesh"},
                                 {"n": 4, "backend": "axisym_s2", "theta_grid": [1.0], "H": [1.0]},
                                 {"schema": "boundary_data/v9", "n": 3, "backend": "homogeneous"},
                                 {"n": 3, "backend": "homogeneous", "area": -1.0, "R_g": 1.0, "H": 0.1}])
def test_json_malformed(doc):
    with pytest.raises(MalformedInputError):
        boundary_data_from_json(doc)
