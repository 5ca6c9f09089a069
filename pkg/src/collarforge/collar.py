"""Inner collar extensions gamma = A(x)^2 ds^2 + r_o^-2 v_m(s)^2 g on [0, s_o] x Sigma.

The collar starts at Sigma_0 with induced metric g and mean curvature H (or
the constant max H in cmc mode) and ends at a minimal slice Sigma_{s_o} whose
area is |Sigma| (1 - theta)^((n-1)/(n-2)).
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .boundary import (
    AxisymS2Data,
    BoundaryField,
    HomogeneousData,
    InadmissibleDataError,
    Verdict,
    check_mode,
    collar_parameters,
    is_minimal,
    theta as theta_of,
)
from .config import tolerances
from .errors import MalformedInputError
from .geometry import AxisymS2Fiber, RoundFiber, scalar_curvature_fd, unit_sphere_area, warped_metric
from .profile import DEFAULT_SAMPLES, solve_profile


@dataclass(frozen=True)
class CollarExtension:
    n: int
    data: object
    mode: str
    theta: float
    m: float
    r_o: float
    profile: object = None
    A: BoundaryField = None
    degenerate: bool = False

    @property
    def s_o(self):
        return 0.0 if self.degenerate else self.profile.s_o

    @property
    def reversed(self):
        cached = self.__dict__.get("_reversed")
        if cached is None:
            cached = self.profile.reversed()
            object.__setattr__(self, "_reversed", cached)
        return cached

    def v_at(self, s):
        return self.reversed.v_at(s)

    @property
    def boundary_H(self):
        """Mean curvature the collar is built to match at Sigma_0."""
        if self.mode == "cmc":
            return np.full(self.data.H.shape, float(np.max(self.data.H)))
        return self.data.H


def build_collar(data, mode="laplacian", samples=DEFAULT_SAMPLES):
    """Collar extension of ``data`` in the given mode.

    cmc mode uses H_o = max H and a constant lapse; laplacian mode uses H(x)
    pointwise.  H identically zero in cmc mode gives a zero-length,
    ``degenerate`` collar with m = r_o^(n-2)/2.
    """
    check_mode(mode)
    n = data.n
    r_o = data.r_o
    if mode == "cmc" and is_minimal(data):
        return CollarExtension(n, data, mode, 0.0, 0.5 * r_o ** (n - 2), r_o, degenerate=True)
    theta = theta_of(data, mode)
    m, lapse = collar_parameters(data, theta, mode)
    profile = solve_profile(m, r_o, n, samples)
    return CollarExtension(n, data, mode, theta, m, r_o, profile, lapse)


def _require_live(collar):
    if collar.degenerate:
        raise MalformedInputError("degenerate (zero-length) collar has no interior to evaluate")


def mean_curvature_slice(collar, s):
    """H_s(x) = (n-1) / (A(x) v(s)) sqrt(1 - 2m/v(s)^(n-2)) w.r.t. -d/ds."""
    _require_live(collar)
    if not 0.0 <= s <= collar.s_o:
        raise MalformedInputError(f"s={s!r} outside [0, s_o={collar.s_o!r}]")
    view = collar.reversed
    v = float(view.v_at(s))
    values = (collar.n - 1) / (collar.A.values * v) * math.sqrt(view.lapse_factor_at(s))
    return BoundaryField(values, "1/length")


def curvature_bracket(collar):
    """R_g - (n-1)(n-2) r_o^-2 A^-2 - 2 A^-1 Delta A per sample.

    R_gamma(s, x) is this bracket times r_o^2 / v(s)^2.  For A proportional
    to 1/H it equals R_g - ((n-2)/(n-1)) H^2 / theta - 2 H Delta(1/H).
    """
    _require_live(collar)
    n, a = collar.n, collar.A.values
    lap_a = collar.data.laplacian(a)
    return collar.data.R_g - (n - 1) * (n - 2) / (collar.r_o**2 * a * a) - 2.0 * lap_a / a


def scalar_curvature_closed_form(collar, s, index=None):
    """R_gamma at proper coordinate s for every sample (or only ``index``)."""
    bracket = curvature_bracket(collar)
    s = np.asarray(s, dtype=float)
    factor = collar.r_o**2 / collar.reversed.v_at(s) ** 2
    out = np.multiply.outer(factor, bracket)
    if index is not None:
        out = out[..., index]
    return out


def slice_area(collar, s):
    """|Sigma_s| = |Sigma| (v(s)/r_o)^(n-1)."""
    if collar.degenerate:
        return collar.data.area
    return collar.data.area * (np.asarray(collar.reversed.v_at(s)) / collar.r_o) ** (collar.n - 1)


def minimal_end_area_routes(collar):
    """|Sigma_{s_o}| three ways: profile endpoint, theta formula, horizon mass."""
    n = collar.n
    from_theta = collar.data.area * (1.0 - collar.theta) ** ((n - 1) / (n - 2))
    if collar.degenerate:
        return {"profile": collar.data.area, "theta": from_theta, "mass": collar.data.area}
    endpoint = float(collar.reversed.v[-1])
    return {
        "profile": collar.data.area * (endpoint / collar.r_o) ** (n - 1),
        "theta": from_theta,
        "mass": unit_sphere_area(n) * (2.0 * collar.m) ** ((n - 1) / (n - 2)),
    }


def minimal_end_area(collar):
    """Area of the minimal end Sigma_{s_o}, read off the profile endpoint."""
    return minimal_end_area_routes(collar)["profile"]


# ---------------------------------------------------------------------------
# finite-difference oracle


def fd_metric(collar):
    """Coordinate sampler of gamma on (s, fiber coordinates) for the FD oracle.

    Homogeneous data use a round fiber whose scalar curvature equals R_g (the
    curvature formula is local, so any such g will do); axisymmetric data use
    cosine-series interpolants of A and w.  Tabulated data carry no metric and
    return None.
    """
    _require_live(collar)
    data = collar.data
    warp = lambda s: collar.reversed.v_at(s) / collar.r_o
    if isinstance(data, HomogeneousData):
        r_g = float(data.R_g[0])
        if r_g <= 0:
            return None
        fiber = RoundFiber(collar.n - 1, math.sqrt((collar.n - 1) * (collar.n - 2) / r_g))
        return warped_metric(float(collar.A.values[0]), warp, fiber), fiber
    if isinstance(data, AxisymS2Data):
        lapse_fn = data.interpolant(collar.A.values)
        fiber = AxisymS2Fiber(data.interpolant(data.conformal_factor), data.radius)
        return warped_metric(lambda x: lapse_fn(x[..., 0]), warp, fiber), fiber
    return None


def fiber_points(collar, indices):
    """Fiber coordinates used by the FD oracle for the given sample indices."""
    data = collar.data
    if isinstance(data, AxisymS2Data):
        theta = data.theta[np.asarray(indices)]
        return np.column_stack([theta, np.full(theta.shape, 0.5)])
    k = collar.n - 1
    base = np.full(k, 0.5 * math.pi)
    base[-1] = 0.5
    return np.tile(base, (len(np.atleast_1d(indices)), 1))


def scalar_curvature_fd(collar, s, indices, h=None):
    """FD-oracle R_gamma on the tensor grid s x indices; None for tabulated data."""
    built = fd_metric(collar)
    if built is None:
        return None
    metric, _ = built
    h = 1e-3 * collar.r_o if h is None else h
    s = np.atleast_1d(np.asarray(s, dtype=float))
    indices = np.atleast_1d(indices)
    x = fiber_points(collar, indices)
    points = np.column_stack([np.repeat(s, len(indices)), np.tile(x, (len(s), 1))])
    from .geometry import scalar_curvature_fd as fd

    return fd(metric, points, h).reshape(len(s), len(indices))


def interior_fd_indices(collar, count=16):
    """Sample indices for FD cross-checks, away from coordinate singularities."""
    data = collar.data
    if isinstance(data, AxisymS2Data):
        inside = np.flatnonzero((data.theta > 0.1 * math.pi) & (data.theta < 0.9 * math.pi))
        picks = np.linspace(0, len(inside) - 1, min(count, len(inside))).round().astype(int)
        return inside[picks]
    return np.array([0])


# ---------------------------------------------------------------------------
# verification


@dataclass
class Clause:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def as_dict(self):
        value = self.value if self.value is None or math.isfinite(self.value) else None
        return {"name": self.name, "passed": self.passed, "value": value,
                "tolerance": self.tolerance, "detail": self.detail}


@dataclass
class VerificationReport:
    clauses: list
    min_R_gamma: float
    grid: tuple
    tolerances: dict
    fd_check: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.clauses)

    def clause(self, key):
        for c in self.clauses:
            if c.name.startswith(key):
                return c
        raise KeyError(key)

    def as_dict(self):
        return {
            "schema": "collar_verification/v1",
            "passed": self.passed,
            "clauses": [c.as_dict() for c in self.clauses],
            "min_R_gamma": self.min_R_gamma,
            "grid": {"s": self.grid[0], "x": self.grid[1]},
            "tolerances": self.tolerances,
            "fd_check": self.fd_check,
        }


def fd_tolerance(collar, h):
    """Allowed |closed form - FD| for the cross-check: O(h^2) plus O(dtheta^2).

    The closed form carries the boundary grid's Laplacian error, the oracle
    the stencil error of step h; both are second order.  Scaled by the size
    of r_o^2/v^2 (R_g + (n-1)(n-2)/(r_o A)^2) at the horizon end.
    """
    data = collar.data
    n = collar.n
    scale = (collar.r_o / collar.profile.r_m) ** 2 * (
        float(np.max(np.abs(data.R_g))) + (n - 1) * (n - 2) / (collar.r_o * float(np.min(collar.A.values))) ** 2
    )
    grid_term = 0.0
    if isinstance(data, AxisymS2Data):
        grid_term = (math.pi / len(data.theta)) ** 2
    return scale * (10.0 * (h / collar.r_o) ** 2 + grid_term)


def verify_proposition(collar, s_samples=256, tol=None, h=None, fd_points=8):
    """Check the five collar properties on a sampled grid.

    (i)   R_gamma >= -tol on the (s, x) grid, and closed form agrees with the
          FD oracle within :func:`fd_tolerance` at interior points;
    (ii)  v(0) = r_o, so gamma induces g on Sigma_0;
    (iii) H_0 equals the boundary mean curvature (H, or H_o in cmc mode);
    (iv)  H_s > 0 for every sampled s < s_o;
    (v)   H_{s_o} = 0 and the minimal-end area identity holds.
    """
    _require_live(collar)
    tol = dict(tolerances(), **(tol or {}))
    n = collar.n
    s_grid = np.linspace(0.0, collar.s_o, s_samples)
    bracket = curvature_bracket(collar)
    factor = collar.r_o**2 / collar.reversed.v_at(s_grid) ** 2
    r_grid = np.multiply.outer(factor, bracket)
    min_r = float(r_grid.min())

    h = 1e-3 * collar.r_o if h is None else h
    fd_info = {"performed": False}
    fd_ok = True
    interior = s_grid[(s_grid > 2 * h) & (s_grid < collar.s_o - 2 * h)]
    if len(interior):
        pick = interior[np.linspace(0, len(interior) - 1, min(fd_points, len(interior))).round().astype(int)]
        idx = interior_fd_indices(collar)
        fd = scalar_curvature_fd(collar, pick, idx, h)
        if fd is not None:
            closed = scalar_curvature_closed_form(collar, pick)[:, idx]
            err = float(np.max(np.abs(fd - closed)))
            allowed = fd_tolerance(collar, h)
            fd_ok = err <= allowed
            fd_info = {"performed": True, "max_abs_diff": err, "allowed": allowed, "h": h,
                       "points": int(fd.size)}
    clauses = [
        Clause("(i) nonnegative scalar curvature", bool(min_r >= -tol["curvature"] and fd_ok), min_r,
               tol["curvature"], "min over grid" + ("" if fd_ok else "; FD oracle disagrees")),
    ]
    v0 = float(collar.profile.u[-1])
    clauses.append(Clause("(ii) induced metric on Sigma_0 is g", abs(v0 - collar.r_o) <= tol["ode"] * collar.r_o,
                          abs(v0 - collar.r_o) / collar.r_o, tol["ode"], "relative |v(0) - r_o|"))
    h0 = mean_curvature_slice(collar, 0.0).values
    target = collar.boundary_H
    dev = float(np.max(np.abs(h0 - target)))
    clauses.append(Clause("(iii) H_0 matches boundary mean curvature",
                          dev <= tol["algebraic"] * max(1.0, float(np.max(target))), dev, tol["algebraic"]))
    h_min = min(float(mean_curvature_slice(collar, s).values.min()) for s in s_grid[:-1])
    clauses.append(Clause("(iv) slices s < s_o have positive mean curvature", h_min > 0.0, h_min, 0.0))
    h_end = float(np.max(np.abs(mean_curvature_slice(collar, collar.s_o).values)))
    routes = minimal_end_area_routes(collar)
    area_res = abs(routes["profile"] - routes["theta"]) / routes["theta"]
    clauses.append(Clause("(v) minimal end with area identity", h_end == 0.0 and area_res <= tol["algebraic"],
                          area_res, tol["algebraic"], f"max |H_s_o| = {h_end}"))
    used = {k: tol[k] for k in ("algebraic", "ode", "curvature")}
    return VerificationReport(clauses, min_r, (s_samples, collar.data.size), used, fd_info)


def corrupt_lapse(collar, factor):
    """Copy of ``collar`` with the lapse field multiplied by ``factor`` (fault injection)."""
    from dataclasses import replace

    return replace(collar, A=BoundaryField(collar.A.values * factor, collar.A.units))
