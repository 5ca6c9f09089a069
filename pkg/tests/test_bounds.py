import math

import numpy as np
import pytest

from collarforge.assembly import SmoothRampMass, make_generated_exterior, make_schwarzschild_exterior
from collarforge.boundary import HomogeneousData, round_sphere_data, schwarzschild_sphere_data
from collarforge.bounds import (
    DISCREPANCY_NOTE,
    bound_both,
    bound_multi,
    bound_thm_delta,
    bound_thm_main,
    end_to_end_check,
    hawking_check,
    minimal_area_identity,
    penrose_bound_minimal,
)
from collarforge.errors import InadmissibleDataError, InequalityViolation, MalformedInputError
from collarforge.geometry import unit_sphere_area

from generators import perturbed_round, random_admissible_axisym


def schwarzschild_example():
    return HomogeneousData(3, 16 * math.pi, 0.5, math.sqrt(0.5))


@pytest.mark.parametrize("area, n, expected", [(16 * math.pi, 3, 1.0), (0.0, 5, 0.0),
                                               (unit_sphere_area(4), 4, 0.5)])
def test_penrose_bound_minimal_examples(area, n, expected):
    assert penrose_bound_minimal(area, n) == pytest.approx(expected, abs=1e-15)


def test_penrose_bound_rejects_negative_area():
    with pytest.raises(MalformedInputError):
        penrose_bound_minimal(-1.0, 3)


def test_thm_main_examples():
    assert bound_thm_main(schwarzschild_example()).lower_bound == pytest.approx(0.5, abs=1e-14)
    report = bound_thm_main(HomogeneousData(3, 16 * math.pi, 0.5, 0.0))
    assert report.theorem == "rpi" and report.lower_bound == pytest.approx(1.0, abs=1e-14)
    assert bound_thm_main(schwarzschild_example().scaled(3.0)).lower_bound == pytest.approx(1.5, abs=1e-13)


def test_thm_delta_equals_thm_main_for_constant_h():
    for data in (schwarzschild_example(), HomogeneousData(5, 3.0, 7.0, 1.1), perturbed_round(32, eps=0.0)):
        a, b = bound_thm_main(data), bound_thm_delta(data)
        assert a.lower_bound == b.lower_bound and a.theta == b.theta


def test_thm_delta_schwarzschild_boundary():
    report = bound_thm_delta(schwarzschild_sphere_data(3, 0.5, 2.0), with_profile=True)
    assert report.lower_bound == pytest.approx(0.5, abs=1e-14)
    assert report.lower_bound_profile == pytest.approx(0.5, abs=1e-10)


def _perturbed_bound_dense(h0=0.7, eps=0.05, r=2.0, samples=5121):
    """Brute-force bound for H = h0 (1 + eps cos t) on the round sphere of radius r (n = 3)."""
    t = np.linspace(0, math.pi, samples)
    c, s = np.cos(t), np.sin(t)
    h = h0 * (1 + eps * c)
    lap = (2 * eps * c / (h0 * (1 + eps * c) ** 2) + 2 * eps**2 * s**2 / (h0 * (1 + eps * c) ** 3)) / r**2
    th = 0.5 * np.max(h**2 / (2 / r**2 - 2 * h * lap))
    return 0.5 * (4 * math.pi * r**2 * (1 - th) ** 2 / (4 * math.pi)) ** 0.5


def test_thm_delta_perturbed_matches_dense_oracle():
    report = bound_thm_delta(perturbed_round(512))
    assert report.lower_bound == pytest.approx(_perturbed_bound_dense(), abs=1e-6)
    assert report.lower_bound < penrose_bound_minimal(report.area, 3)


def test_bound_profile_route_agrees():
    report = bound_thm_delta(perturbed_round(128), with_profile=True)
    assert abs(report.profile_area - report.minimal_end_area) <= 1e-10 * report.minimal_end_area


def test_flat_sphere_is_inadmissible():
    with pytest.raises(InadmissibleDataError):
        bound_thm_main(round_sphere_data(3, 2.0, 1.0))
    doc = bound_both(round_sphere_data(3, 2.0, 1.0))
    assert doc["larger"] is None and all("error" in r for r in doc["reports"].values())


def test_bound_both_marks_larger():
    doc = bound_both(perturbed_round(128))
    reports = doc["reports"]
    larger = doc["larger"]
    other = "cmc" if larger == "laplacian" else "laplacian"
    assert reports[larger]["lower_bound"] >= reports[other]["lower_bound"]


def test_bound_is_monotone_in_theta():
    values = [penrose_bound_minimal(minimal_area_identity(16 * math.pi, th, 3), 3) for th in np.linspace(0, 0.99, 50)]
    assert np.all(np.diff(values) < 0)
    assert minimal_area_identity(16 * math.pi, 0.0, 3) == 16 * math.pi


# --- several components --------------------------------------------------------


def test_multi_component_examples():
    data = schwarzschild_example()
    two = bound_multi([data, data])
    assert two.total_minimal_area == pytest.approx(8 * math.pi, rel=1e-14)
    assert two.lower_bound == pytest.approx(0.5 * math.sqrt(2), abs=1e-12)
    minimal = HomogeneousData(3, 16 * math.pi, 0.5, 0.0)
    mixed = bound_multi([minimal, data])
    assert mixed.lower_bound == pytest.approx(0.5 * math.sqrt(5), abs=1e-12)
    assert DISCREPANCY_NOTE in mixed.notes
    assert mixed.displayed_form_value != pytest.approx(mixed.lower_bound)


def test_multi_single_component_reduces():
    for mode, data in (("cmc", schwarzschild_example()), ("laplacian", perturbed_round(64))):
        single = bound_multi([data], mode)
        assert single.lower_bound == pytest.approx(
            (bound_thm_main if mode == "cmc" else bound_thm_delta)(data).lower_bound, rel=1e-15)


@pytest.mark.parametrize("k", [2, 3, 7])
@pytest.mark.parametrize("n", [3, 5])
def test_multi_identical_components_scaling(k, n):
    data = HomogeneousData(n, 4.0, 20.0, 1.5)
    single = bound_thm_main(data)
    multi = bound_multi([data] * k)
    expected = k ** ((n - 2) / (n - 1)) * single.lower_bound
    assert multi.lower_bound == pytest.approx(expected, rel=1e-12)


def test_multi_rejects_mixed_dimensions():
    with pytest.raises(MalformedInputError):
        bound_multi([schwarzschild_example(), HomogeneousData(4, 3.0, 6.0, 1.0)])
    with pytest.raises(MalformedInputError):
        bound_multi([])


# --- Hawking mass --------------------------------------------------------------


def test_hawking_equality_on_schwarzschild():
    report = hawking_check(schwarzschild_sphere_data(3, 0.5, 2.0))
    assert report.willmore_term == pytest.approx(0.5, abs=1e-8)
    assert report.theta == pytest.approx(0.5, abs=1e-8)
    assert report.hawking_mass == pytest.approx(0.5, abs=1e-8)
    assert report.lower_bound == pytest.approx(0.5, abs=1e-8)
    assert report.chain_ok


def test_hawking_perturbed_is_strict():
    report = hawking_check(perturbed_round(128))
    assert report.chain_ok
    assert report.willmore_term < report.middle_term <= report.theta
    assert report.lower_bound < report.hawking_mass


def test_hawking_random_axisym():
    for _, data in random_admissible_axisym(np.random.default_rng(11), samples=64, count=5):
        report = hawking_check(data)
        assert report.chain_ok and report.willmore_term <= report.theta


def test_hawking_needs_three_dimensions():
    with pytest.raises(MalformedInputError):
        hawking_check(HomogeneousData(4, 3.0, 6.0, 1.0))


# --- end to end ----------------------------------------------------------------


@pytest.mark.parametrize("mode", ["cmc", "laplacian"])
def test_end_to_end_schwarzschild_example(mode):
    report = end_to_end_check(make_schwarzschild_exterior(0.5, 2.0, 3), mode)
    assert report.equality_expected
    assert report.adm_mass == pytest.approx(0.5, abs=1e-6)
    assert abs(report.slack) <= 1e-6


def test_end_to_end_generated_is_strict():
    report = end_to_end_check(make_generated_exterior(SmoothRampMass(0.5, 0.8, 3.0), 2.0, 3))
    assert not report.equality_expected
    assert report.adm_mass == pytest.approx(0.8, abs=1e-6)
    assert report.bound.lower_bound == pytest.approx(0.5, abs=1e-12)
    assert report.slack == pytest.approx(0.3, abs=1e-6)


def test_end_to_end_flux_cross_check():
    report = end_to_end_check({"kind": "schwarzschild", "n": 3, "r_o": 2.0, "m": 0.5}, flux=True)
    assert report.flux_mass.mass == pytest.approx(0.5, abs=1e-4)
    assert report.as_dict()["flux_adm"]["converged"]


def test_end_to_end_flags_corrupted_mass(monkeypatch):
    import collarforge.bounds as bounds_mod
    from collarforge.assembly import AdmEstimate

    monkeypatch.setattr(bounds_mod, "manifold_adm_mass", lambda ext: AdmEstimate(0.4, 0.0, 0.4, 0.0, True))
    with pytest.raises(InequalityViolation) as info:
        end_to_end_check(make_schwarzschild_exterior(0.5, 2.0, 3))
    assert info.value.report["slack"] < 0
