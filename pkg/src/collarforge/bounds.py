"""Mass lower bounds from boundary data, Hawking comparison and end-to-end checks.

Every bound has the form (1/2) (A / omega_{n-1})^((n-2)/(n-1)) where A is the
area of the minimal end of the collar, |Sigma| (1 - theta)^((n-1)/(n-2)).
"""

from dataclasses import dataclass, field
import hashlib
import json
import math

import numpy as np

from .adm import adm_mass
from .assembly import (
    RotSymExterior,
    boundary_data_of_exterior,
    exterior_from_json,
    exterior_metric_spec,
    manifold_adm_mass,
)
from .boundary import admissibility, check_mode, is_minimal, theta as theta_of
from .collar import build_collar, minimal_end_area_routes
from .config import tolerances
from .errors import ConvergenceError, InadmissibleDataError, InequalityViolation, MalformedInputError
from .geometry import check_dim, unit_sphere_area

BOUND_SCHEMA = "bound_report/v1"


def penrose_bound_minimal(area, n):
    """(1/2) (area / omega_{n-1})^((n-2)/(n-1)): the bound for a minimal boundary."""
    n = check_dim(n)
    if not area >= 0:
        raise MalformedInputError(f"area must be nonnegative, got {area!r}")
    return 0.5 * (area / unit_sphere_area(n)) ** ((n - 2) / (n - 1))


def minimal_area_identity(area, theta_value, n):
    """|Sigma| (1 - theta)^((n-1)/(n-2)), the collar's minimal-end area."""
    return area * (1.0 - theta_value) ** ((n - 1) / (n - 2))


def data_digest(data):
    doc = json.dumps(data.to_json(), sort_keys=True, default=float)
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


@dataclass
class BoundReport:
    theorem: str
    mode: str
    admissibility: object
    theta: float
    area: float
    minimal_end_area: float
    lower_bound: float
    n: int
    digest: str
    profile_area: float = None
    notes: list = field(default_factory=list)

    @property
    def lower_bound_profile(self):
        """Bound recomputed from the collar profile's endpoint area."""
        if self.profile_area is None:
            return None
        return penrose_bound_minimal(self.profile_area, self.n)

    def as_dict(self):
        return {
            "schema": BOUND_SCHEMA,
            "theorem": self.theorem,
            "mode": self.mode,
            "n": self.n,
            "admissibility": None if self.admissibility is None else self.admissibility.as_dict(),
            "theta": self.theta,
            "area": self.area,
            "minimal_end_area": self.minimal_end_area,
            "minimal_end_area_profile": self.profile_area,
            "lower_bound": self.lower_bound,
            "lower_bound_profile": self.lower_bound_profile,
            "minimal_boundary_bound": penrose_bound_minimal(self.area, self.n),
            "inputs_digest": self.digest,
            "notes": list(self.notes),
        }


def _bound(data, mode, with_profile):
    check_mode(mode)
    n = data.n
    notes = []
    if mode == "cmc" and is_minimal(data):
        adm = admissibility(data, mode)
        area = data.area
        return BoundReport("rpi", mode, adm, 0.0, data.area, area, penrose_bound_minimal(area, n), n,
                           data_digest(data), area if with_profile else None, ["minimal boundary"])
    th = theta_of(data, mode)
    adm = admissibility(data, mode)
    notes.extend(adm.notes)
    area = minimal_area_identity(data.area, th, n)
    profile_area = None
    if with_profile:
        routes = minimal_end_area_routes(build_collar(data, mode))
        profile_area = routes["profile"]
        residual = abs(profile_area - area) / area
        if residual > tolerances()["algebraic"]:
            raise ConvergenceError("collar endpoint area disagrees with the area identity",
                                   {"profile": profile_area, "identity": area, "residual": residual})
    theorem = "thm_main" if mode == "cmc" else "thm_delta"
    return BoundReport(theorem, mode, adm, th, data.area, area, penrose_bound_minimal(area, n), n,
                       data_digest(data), profile_area, notes)


def bound_thm_main(data, with_profile=False):
    """Bound with theta = ((n-2)/(n-1)) max H^2 / min R_g (constant-mean-curvature collar).

    H identically zero gives the minimal-boundary bound.  ``with_profile``
    also builds the collar and cross-checks its endpoint area.
    """
    return _bound(data, "cmc", with_profile)


def bound_thm_delta(data, with_profile=False):
    """Bound with theta = ((n-2)/(n-1)) max H^2 / (R_g - 2 H Delta(1/H)); needs H > 0."""
    return _bound(data, "laplacian", with_profile)


def bound_for_mode(data, mode, with_profile=False):
    return _bound(data, mode, with_profile)


def bound_both(data):
    """Reports for both modes where admissible, with the larger bound marked."""
    out = {}
    for mode in ("cmc", "laplacian"):
        try:
            out[mode] = _bound(data, mode, False).as_dict()
        except InadmissibleDataError as exc:
            adm = getattr(exc, "admissibility", None)
            out[mode] = {"error": str(exc), "admissibility": None if adm is None else adm.as_dict()}
    values = {k: v["lower_bound"] for k, v in out.items() if "lower_bound" in v}
    best = max(values, key=values.get) if values else None
    return {"schema": "bound_pair/v1", "reports": out, "larger": best}


# ---------------------------------------------------------------------------
# several boundary components


@dataclass
class MultiBoundReport:
    components: list
    total_minimal_area: float
    lower_bound: float
    n: int
    displayed_form_value: float
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {
            "schema": "multi_bound_report/v1",
            "n": self.n,
            "components": [c.as_dict() for c in self.components],
            "total_minimal_area": self.total_minimal_area,
            "lower_bound": self.lower_bound,
            "displayed_form_value": self.displayed_form_value,
            "notes": list(self.notes),
        }


DISCREPANCY_NOTE = (
    "lower_bound sums the collar minimal-end areas |Sigma_i| (1 - theta_i)^((n-1)/(n-2)); "
    "displayed_form_value uses the factor (1 - theta_i)^(-(n-2)/(n-1)) instead. "
    "The two disagree whenever some theta_i > 0; only lower_bound follows from the area identity."
)


def bound_multi(components, mode="cmc"):
    """Bound for a boundary with several components via the summed minimal-end areas."""
    check_mode(mode)
    components = list(components)
    if not components:
        raise MalformedInputError("need at least one boundary component")
    n = components[0].n
    if any(c.n != n for c in components):
        raise MalformedInputError("all components must share the dimension")
    reports = []
    for data in components:
        if is_minimal(data):
            reports.append(_bound(data, "cmc", False))
        else:
            reports.append(_bound(data, mode, False))
    total = math.fsum(r.minimal_end_area for r in reports)
    k = (n - 2) / (n - 1)
    displayed = 0.5 * unit_sphere_area(n) ** -k * math.fsum(
        r.area * (1.0 - r.theta) ** -k for r in reports) ** k
    return MultiBoundReport(reports, total, penrose_bound_minimal(total, n), n, displayed, [DISCREPANCY_NOTE])


# ---------------------------------------------------------------------------
# Hawking mass comparison (n = 3)


@dataclass
class HawkingReport:
    hawking_mass: float
    willmore_term: float
    middle_term: float
    theta: float
    lower_bound: float
    chain_ok: bool
    tolerance: float

    def as_dict(self):
        return {
            "schema": "hawking_report/v1",
            "hawking_mass": self.hawking_mass,
            "willmore_term": self.willmore_term,
            "ratio_bound_term": self.middle_term,
            "theta": self.theta,
            "lower_bound": self.lower_bound,
            "willmore_slack": self.theta - self.willmore_term,
            "mass_slack": self.hawking_mass - self.lower_bound,
            "chain_ok": self.chain_ok,
            "tolerance": self.tolerance,
        }


def hawking_check(data, tol=None):
    """Compare the laplacian-mode bound with the Hawking mass of a 2-surface.

    The chain is (1/16pi) int H^2 <= (1/16pi) max(ratio) int (R_g - 2 H Delta(1/H)) <= theta,
    the last step by Gauss-Bonnet, whence sqrt(|Sigma|/16pi)(1 - theta) <= m_H.
    """
    if data.n != 3:
        raise MalformedInputError(f"the Hawking mass comparison needs n = 3, got n = {data.n}")
    tol = tolerances()["algebraic"] if tol is None else tol
    report = bound_thm_delta(data)
    th = report.theta
    willmore = data.integrate(data.H**2) / (16.0 * math.pi)
    reduced = data.R_g - 2.0 * data.H * data.lap_inverse_H()
    ratio_max = float(np.max(data.H**2 / reduced))
    middle = ratio_max * data.integrate(reduced) / (16.0 * math.pi)
    m_h = math.sqrt(data.area / (16.0 * math.pi)) * (1.0 - willmore)
    ok = willmore <= middle + tol and middle <= th + tol and report.lower_bound <= m_h + tol
    return HawkingReport(m_h, willmore, middle, th, report.lower_bound, bool(ok), tol)


# ---------------------------------------------------------------------------
# end to end


@dataclass
class EndToEndReport:
    adm: object
    bound: BoundReport
    slack: float
    equality_expected: bool
    tolerance: float
    flux_mass: object = None

    @property
    def adm_mass(self):
        return self.adm.mass

    def as_dict(self):
        doc = {
            "schema": "end_to_end/v1",
            "adm_mass": self.adm.mass,
            "adm": self.adm.as_dict(),
            "bound": self.bound.as_dict(),
            "slack": self.slack,
            "equality_expected": self.equality_expected,
            "tolerance": self.tolerance,
            "verdict": "equality" if self.equality_expected else "inequality",
        }
        if self.flux_mass is not None:
            doc["flux_adm"] = self.flux_mass.as_dict()
        return doc


def flux_radii(ext, count=3):
    """Radii r = c^(1/(n-2)), c in {50, 100, 200} (scaled to fit inside the profile)."""
    n = ext.n
    r_far = float(ext.f[-1])
    base = [c ** (1.0 / (n - 2)) for c in (50.0, 100.0, 200.0)]
    shift = max(1.0, 2.0 * ext.r_o / base[0])
    radii = [shift * r for r in base]
    if radii[-1] > r_far:
        raise MalformedInputError("exterior profile too short for the flux radii")
    return radii


def end_to_end_check(exterior, mode="laplacian", flux=False, tol=None):
    """ADM mass against the bound from the exterior's own inner boundary.

    Raises InequalityViolation when ADM < bound - tol, or, for Schwarzschild
    exteriors, when |ADM - bound| > tol.  Both signal a bug, since the
    hypotheses hold by construction.
    """
    if isinstance(exterior, dict):
        exterior = exterior_from_json(exterior)
    if not isinstance(exterior, RotSymExterior):
        raise MalformedInputError("end_to_end_check needs a rotationally symmetric exterior")
    tol = tolerances()["mass"] if tol is None else tol
    adm = manifold_adm_mass(exterior)
    data = boundary_data_of_exterior(exterior)
    report = bound_for_mode(data, mode, with_profile=True)
    bound = report.lower_bound_profile
    slack = adm.mass - bound
    equality = exterior.kind == "schwarzschild" or exterior.mass_fn.is_constant
    flux_result = None
    if flux:
        flux_result = adm_mass(exterior_metric_spec(exterior), flux_radii(exterior))
    result = EndToEndReport(adm, report, slack, equality, tol, flux_result)
    if slack < -tol:
        raise InequalityViolation(f"ADM mass {adm.mass!r} below the bound {bound!r}", result.as_dict())
    if equality and abs(slack) > tol:
        raise InequalityViolation(f"equality case missed: ADM {adm.mass!r} vs bound {bound!r}", result.as_dict())
    return result
