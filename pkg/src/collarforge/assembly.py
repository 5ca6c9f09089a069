"""Rotationally symmetric exteriors, gluing along Sigma, and corner smoothing.

An exterior is ds^2 + f(s)^2 g_* on [0, S_max] x S^(n-1) with g_* the unit
round metric and f(0) = r_o.  Its quasi-local mass m = f^(n-2) (1 - f'^2) / 2
is prescribed, and f solves f' = sqrt(1 - 2 m(s) / f^(n-2)).  The scalar
curvature 2 (n-1) m' / (f' f^(n-1)) is nonnegative exactly when m is
nondecreasing.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import solve_ivp

from .adm import radial_metric_spec
from .boundary import AxisymS2Data, BoundaryData, HomogeneousData, TabulatedData
from .collar import CollarExtension, mean_curvature_slice
from .config import tolerances
from .errors import ConvergenceError, CornerConditionError, MalformedInputError
from .geometry import RoundFiber, check_dim, quasilocal_mass, scalar_curvature_fd, unit_sphere_area, warped_metric

EXTERIOR_SCHEMA = "exterior/v1"


# ---------------------------------------------------------------------------
# mass functions


class MassFunction:
    """Nondecreasing m(s) on [0, oo), constant beyond ``support_end``."""

    knots = ()
    support_end = 0.0

    @property
    def m0(self):
        return float(self(0.0))

    @property
    def m_inf(self):
        return float(self(self.support_end))

    @property
    def is_constant(self):
        return self.m_inf == self.m0


class ConstantMass(MassFunction):
    def __init__(self, m):
        self.m = float(m)
        if self.m < 0:
            raise MalformedInputError(f"mass must be nonnegative, got {m!r}")

    def __call__(self, s):
        return np.full(np.shape(s), self.m) if np.ndim(s) else self.m

    def derivative(self, s):
        return np.zeros(np.shape(s)) if np.ndim(s) else 0.0

    def to_table(self):
        return [[0.0, self.m]]


class PiecewiseLinearMass(MassFunction):
    """Linear interpolation of a table (s_i, m_i); constant outside the table."""

    def __init__(self, table):
        table = np.asarray(table, dtype=float)
        if table.ndim != 2 or table.shape[1] != 2 or len(table) < 1:
            raise MalformedInputError("mass table must be a list of [s, m] pairs")
        s, m = table[:, 0], table[:, 1]
        if s[0] != 0.0:
            raise MalformedInputError("mass table must start at s = 0")
        if np.any(np.diff(s) <= 0):
            raise MalformedInputError("mass table abscissae must increase strictly")
        if np.any(np.diff(m) < 0):
            raise MalformedInputError("mass function must be nondecreasing")
        if m[0] < 0:
            raise MalformedInputError("mass function must be nonnegative")
        self.s, self.m = s, m
        self.knots = tuple(s)
        self.support_end = float(s[-1])

    def __call__(self, s):
        out = np.interp(s, self.s, self.m)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, s):
        slopes = np.diff(self.m) / np.diff(self.s) if len(self.s) > 1 else np.zeros(0)
        idx = np.searchsorted(self.s, s, side="right") - 1
        inside = (idx >= 0) & (idx < len(slopes))
        out = np.where(inside, slopes[np.clip(idx, 0, max(len(slopes) - 1, 0))] if len(slopes) else 0.0, 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def to_table(self):
        return np.column_stack([self.s, self.m]).tolist()


class SmoothRampMass(MassFunction):
    """C^2 ramp from m0 to m1 over [0, length] by the quintic smoothstep."""

    def __init__(self, m0, m1, length):
        if not 0 <= m0 <= m1:
            raise MalformedInputError("ramp needs 0 <= m0 <= m1")
        if not length > 0:
            raise MalformedInputError("ramp length must be positive")
        self._m0, self._m1, self.length = float(m0), float(m1), float(length)
        self.knots = (0.0, self.length)
        self.support_end = self.length

    def __call__(self, s):
        t = np.clip(np.asarray(s, dtype=float) / self.length, 0.0, 1.0)
        out = self._m0 + (self._m1 - self._m0) * t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
        return float(out) if out.ndim == 0 else out

    def derivative(self, s):
        t = np.clip(np.asarray(s, dtype=float) / self.length, 0.0, 1.0)
        out = (self._m1 - self._m0) * 30.0 * t * t * (1.0 - t) ** 2 / self.length
        return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# exteriors


@dataclass
class RotSymExterior:
    """Sampled exterior profile (s, f, f') on [0, S_max] with f(0) = r_o."""

    n: int
    r_o: float
    kind: str
    mass_fn: MassFunction
    s: np.ndarray
    f: np.ndarray
    df: np.ndarray
    segments: list = field(repr=False, default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def S_max(self):
        return float(self.s[-1])

    @property
    def quasilocal(self):
        return quasilocal_mass(self.f, self.df, self.n)

    @property
    def flatness(self):
        """1 - f'(S_max); the profile counts as asymptotically flat when small."""
        return 1.0 - float(self.df[-1])

    @property
    def adm_mass(self):
        return manifold_adm_mass(self).mass

    def f_at(self, s):
        """f between samples from the integrator's dense output."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if np.any(s < 0) or np.any(s > self.S_max * (1 + 1e-12)):
            raise MalformedInputError("s outside [0, S_max]")
        out = np.empty_like(s)
        starts = np.array([seg[0] for seg in self.segments])
        which = np.clip(np.searchsorted(starts, s, side="right") - 1, 0, len(self.segments) - 1)
        for k in np.unique(which):
            sel = which == k
            out[sel] = self.segments[k][2](s[sel])[0]
        return out

    def df_at(self, s):
        s = np.asarray(s, dtype=float)
        f = self.f_at(s)
        return np.sqrt(np.maximum(1.0 - 2.0 * self.mass_fn(s) / f ** (self.n - 2), 0.0))

    def boundary_H(self):
        return (self.n - 1) * float(self.df[0]) / self.r_o

    def to_json(self):
        doc = {"schema": EXTERIOR_SCHEMA, "kind": self.kind, "n": self.n, "r_o": self.r_o, "S_max": self.S_max}
        if isinstance(self.mass_fn, ConstantMass):
            doc["m"] = self.mass_fn.m
        elif hasattr(self.mass_fn, "to_table"):
            doc["mass_fn"] = self.mass_fn.to_table()
        return doc


def _integrate_profile(n, r_o, mass_fn, s_max, rtol):
    k = n - 2

    def rhs(s, y):
        arg = 1.0 - 2.0 * mass_fn(s) / y[0] ** k
        if arg < 0:
            raise MalformedInputError(
                f"f'^2 < 0 at s={s:.6g}: mass function too large for the radius (f={y[0]:.6g})")
        return [math.sqrt(arg)]

    breaks = sorted({0.0, *[b for b in mass_fn.knots if 0 < b < s_max], s_max})
    segments = []
    samples = []
    f = r_o
    for a, b in zip(breaks, breaks[1:]):
        sol = solve_ivp(rhs, (a, b), [f], method="DOP853", rtol=rtol, atol=rtol * r_o, dense_output=True)
        if not sol.success:
            raise ConvergenceError("exterior integration failed", {"message": sol.message, "s": a})
        segments.append((a, b, sol.sol))
        samples.append(sol.t if not samples else sol.t[1:])
        f = float(sol.y[0, -1])
    return segments, np.concatenate(samples)


def _default_s_max(n, r_o, mass_fn, flat):
    """Length after which 1 - f' <= flat/2, estimated from f >= r_o + s."""
    m_inf = mass_fn.m_inf
    end = mass_fn.support_end + 10.0 * r_o
    if m_inf == 0:
        return end
    r_flat = (2.0 * m_inf / flat) ** (1.0 / (n - 2))
    return max(end, mass_fn.support_end + r_flat)


def make_generated_exterior(mass_fn, r_o, n, S_max=None, rtol=1e-12, samples=4096, kind="generated"):
    """Exterior with prescribed nondecreasing quasi-local mass ``mass_fn``.

    ``mass_fn`` is a MassFunction, a number (constant mass) or a table of
    (s, m) pairs.  Raises MalformedInputError when f'^2 would turn negative.
    """
    n = check_dim(n)
    r_o = float(r_o)
    if not r_o > 0:
        raise MalformedInputError("r_o must be positive")
    if isinstance(mass_fn, (int, float)):
        mass_fn = ConstantMass(mass_fn)
    elif not isinstance(mass_fn, MassFunction):
        mass_fn = PiecewiseLinearMass(mass_fn)
    if not r_o ** (n - 2) > 2.0 * mass_fn.m0:
        raise MalformedInputError(f"boundary at or inside the horizon: r_o^(n-2)={r_o ** (n - 2)!r} <= 2m(0)")
    flat = tolerances()["flat"]
    if S_max is None:
        S_max = _default_s_max(n, r_o, mass_fn, flat)
    S_max = float(S_max)
    if not S_max > mass_fn.support_end and not mass_fn.is_constant:
        raise MalformedInputError("S_max must extend past the support of the mass function")
    segments, steps = _integrate_profile(n, r_o, mass_fn, S_max, rtol)
    near = np.linspace(0.0, min(S_max, mass_fn.support_end + 4.0 * r_o), samples)
    far = np.geomspace(max(near[-1], 1e-300), S_max, 256) if S_max > near[-1] else np.zeros(0)
    s = np.unique(np.concatenate([near, far, steps]))
    ext = RotSymExterior(n, r_o, kind, mass_fn, s, np.empty(0), np.empty(0), segments)
    ext.f = ext.f_at(s)
    ext.f[0] = r_o
    ext.df = np.sqrt(np.maximum(1.0 - 2.0 * mass_fn(s) / ext.f ** (n - 2), 0.0))
    ext.params = {"m0": mass_fn.m0, "m_inf": mass_fn.m_inf}
    return ext


def make_schwarzschild_exterior(m1, r_o, n, S_max=None):
    """Schwarzschild region outside the sphere of area radius r_o."""
    n = check_dim(n)
    if not float(r_o) ** (n - 2) > 2.0 * m1:
        raise MalformedInputError(f"boundary at or inside the horizon (r_o={r_o!r}, m={m1!r})")
    return make_generated_exterior(ConstantMass(m1), r_o, n, S_max, kind="schwarzschild")


def boundary_data_of_exterior(ext):
    """(Sigma, g, H) at the inner boundary of a rotationally symmetric exterior."""
    n = ext.n
    return HomogeneousData(n, unit_sphere_area(n) * ext.r_o ** (n - 1), (n - 1) * (n - 2) / ext.r_o**2,
                           ext.boundary_H())


def exterior_from_json(doc):
    """Exterior from ``{kind, n, r_o, m | mass_fn, S_max}``."""
    if not isinstance(doc, dict):
        raise MalformedInputError("exterior spec must be a JSON object")
    try:
        kind = doc.get("kind", "schwarzschild" if "m" in doc else "generated")
        n, r_o, s_max = doc["n"], float(doc["r_o"]), doc.get("S_max")
        if kind == "schwarzschild":
            return make_schwarzschild_exterior(float(doc["m"]), r_o, n, s_max)
        if kind == "generated":
            table = doc.get("mass_fn")
            if table is None:
                return make_generated_exterior(ConstantMass(float(doc["m"])), r_o, n, s_max)
            return make_generated_exterior(PiecewiseLinearMass(table), r_o, n, s_max)
    except KeyError as exc:
        raise MalformedInputError(f"exterior spec missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MalformedInputError):
            raise
        raise MalformedInputError(f"bad exterior spec: {exc}") from None
    raise MalformedInputError(f"unknown exterior kind {kind!r}")


def exterior_scalar_curvature(ext, s=None):
    """Closed-form 2 (n-1) m'(s) / (f' f^(n-1)) at samples (default: all)."""
    s = ext.s if s is None else np.asarray(s, dtype=float)
    f = ext.f_at(s)
    return 2.0 * (ext.n - 1) * ext.mass_fn.derivative(s) / (ext.df_at(s) * f ** (ext.n - 1))


def exterior_scalar_curvature_fd(ext, s, h=None):
    """FD-oracle scalar curvature of ds^2 + f^2 g_* at the given s."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    h = 1e-3 * ext.r_o if h is None else h
    fiber = RoundFiber(ext.n - 1, 1.0)
    metric = warped_metric(1.0, lambda t: ext.f_at(t).reshape(np.shape(t)), fiber)
    x = np.full((len(s), ext.n - 1), 0.5 * math.pi)
    x[:, -1] = 0.5
    return scalar_curvature_fd(metric, np.column_stack([s, x]), h)


def exterior_metric_spec(ext, decay=None):
    """The exterior as a Cartesian metric delta + (1/f'^2 - 1) x x^T / |x|^2.

    Valid for r in [r_o, f(S_max)]; f' is read off as a function of the
    areal radius by inverting the monotone profile.
    """
    n = ext.n

    def stretch(r):
        s = np.interp(r, ext.f, ext.s)
        m = ext.mass_fn(s)
        return 1.0 / (1.0 - 2.0 * m / np.asarray(r) ** (n - 2)) - 1.0

    decay = (float(n - 2), 2.0 * n + 1.0) if decay is None else decay
    return radial_metric_spec(n, stretch, decay, ext.r_o, name=f"{ext.kind}_exterior")


# ---------------------------------------------------------------------------
# mass of the end


@dataclass
class AdmEstimate:
    mass: float
    flatness: float
    tail_extrapolated: float
    tail_spread: float
    converged: bool

    def as_dict(self):
        return {"mass": self.mass, "flatness": self.flatness, "tail_extrapolated": self.tail_extrapolated,
                "tail_spread": self.tail_spread, "converged": self.converged}


def manifold_adm_mass(obj, strict=True):
    """ADM mass of a rotationally symmetric end as the large-s limit of the quasi-local mass.

    The last samples are also extrapolated linearly in f^-(n-2) as a
    diagnostic.  Raises ConvergenceError when 1 - f'(S_max) exceeds the
    flatness tolerance.
    """
    ext = obj.exterior if isinstance(obj, CornerManifold) else obj
    if not isinstance(ext, RotSymExterior):
        raise MalformedInputError("ADM mass needs a rotationally symmetric exterior")
    flat = tolerances()["flat"]
    q = ext.quasilocal
    tail = slice(-3, None)
    x = ext.f[tail] ** -(ext.n - 2)
    slope, intercept = np.polyfit(x, q[tail], 1)
    mass = float(q[-1])
    spread = abs(float(intercept) - mass)
    converged = ext.flatness <= flat
    result = AdmEstimate(mass, ext.flatness, float(intercept), spread, converged)
    if strict and not converged:
        raise ConvergenceError("profile not asymptotically flat at S_max", result.as_dict())
    return result


# ---------------------------------------------------------------------------
# gluing


@dataclass
class CornerManifold:
    collar: CollarExtension
    exterior: object
    H_minus: np.ndarray
    H_plus: np.ndarray
    metric_residual: float
    corner_ok: bool
    quasilocal_jump: float = None

    @property
    def rotationally_symmetric(self):
        return isinstance(self.exterior, RotSymExterior) and isinstance(self.collar.data, HomogeneousData)

    def as_dict(self):
        gap = self.H_minus - self.H_plus
        doc = {
            "schema": "corner/v1",
            "corner_ok": self.corner_ok,
            "metric_residual": self.metric_residual,
            "min_H_gap": float(gap.min()),
            "max_H_gap": float(gap.max()),
            "argmin_H_gap": int(np.argmin(gap)),
            "H_minus": self.H_minus.tolist() if self.H_minus.size <= 16 else None,
            "H_plus": self.H_plus.tolist() if self.H_plus.size <= 16 else None,
            "quasilocal_jump": self.quasilocal_jump,
            "collar": {"mode": self.collar.mode, "theta": self.collar.theta, "m": self.collar.m,
                       "s_o": self.collar.s_o},
        }
        if isinstance(self.exterior, RotSymExterior):
            doc["exterior"] = self.exterior.to_json()
        return doc


def _metric_residual(data, other):
    if isinstance(other, RotSymExterior):
        if not isinstance(data, HomogeneousData) or data.n != other.n:
            raise MalformedInputError("a rotationally symmetric exterior glues only to round homogeneous data")
        area = unit_sphere_area(other.n) * other.r_o ** (other.n - 1)
        round_rg = (other.n - 1) * (other.n - 2) / other.r_o**2
        return max(abs(data.area - area) / area, abs(float(data.R_g[0]) - round_rg) / round_rg)
    if not isinstance(other, BoundaryData) or type(other) is not type(data) or other.n != data.n:
        raise MalformedInputError("exterior boundary data must use the collar's backend and dimension")
    if other.H.shape != data.H.shape:
        raise MalformedInputError("exterior boundary data sampled differently from the collar")
    res = abs(other.area - data.area) / data.area
    scale = max(float(np.max(np.abs(data.R_g))), 1e-300)
    res = max(res, float(np.max(np.abs(other.R_g - data.R_g))) / scale)
    if isinstance(data, AxisymS2Data):
        res = max(res, float(np.max(np.abs(other.theta - data.theta))),
                  float(np.max(np.abs(other.conformal_factor - data.conformal_factor))))
    return res


def glue(collar, exterior, strict=True):
    """Attach ``collar`` inside ``exterior`` along Sigma and check the corner.

    ``exterior`` is a RotSymExterior or BoundaryData describing the outside
    (g, H_+).  Needs matching induced metrics; the corner is admissible when
    H_- >= H_+ pointwise.  With ``strict`` a violation raises
    CornerConditionError, otherwise it is recorded in ``corner_ok``.
    """
    tol = tolerances()
    data = collar.data
    residual = _metric_residual(data, exterior)
    if residual > tol["algebraic"]:
        raise MalformedInputError(f"induced metrics differ along Sigma (residual {residual:.3g})")
    if isinstance(exterior, RotSymExterior):
        h_plus = np.full(data.H.shape, exterior.boundary_H())
    else:
        h_plus = np.asarray(exterior.H, dtype=float)
    h_minus = data.H.copy() if collar.degenerate else mean_curvature_slice(collar, 0.0).values
    scale = max(1.0, float(np.max(np.abs(h_plus))))
    gap = h_minus - h_plus
    ok = bool(np.all(gap >= -tol["algebraic"] * scale))
    jump = None
    if isinstance(exterior, RotSymExterior) and isinstance(data, HomogeneousData):
        n, r_o = data.n, data.r_o
        fp_minus = float(h_minus[0]) * r_o / (n - 1)
        fp_plus = float(h_plus[0]) * r_o / (n - 1)
        jump = 0.5 * r_o ** (n - 2) * (fp_minus**2 - fp_plus**2)
    corner = CornerManifold(collar, exterior, h_minus, h_plus, residual, ok, jump)
    if strict and not ok:
        i = int(np.argmin(gap))
        raise CornerConditionError(
            f"corner condition violated: H_- < H_+ at sample {i} ({h_minus[i]!r} < {h_plus[i]!r})")
    return corner


# ---------------------------------------------------------------------------
# corner smoothing


def bump_cdf(t, power=4):
    """CDF of the even bump c (1 - t^2)^power on [-1, 1]; Phi(t) + Phi(-t) = 1."""
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    coeffs = _bump_poly(power)
    return np.polynomial.polynomial.polyval(t, coeffs.integ(lbnd=-1.0).coef)


def _bump_poly(power):
    base = np.polynomial.Polynomial([1.0, 0.0, -1.0]) ** power
    norm = base.integ(lbnd=-1.0)(1.0)
    return base / norm


def _bump_cdf_integral(t, power=4):
    """int_-1^t (Phi(u) - 1_{u>=0}) du; zero for |t| >= 1 because the bump is even."""
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    cdf = _bump_poly(power).integ(lbnd=-1.0)
    anti = cdf.integ(lbnd=-1.0)
    return anti(t) - np.maximum(t, 0.0)


@dataclass
class MollifiedCorner:
    delta: float
    rho: np.ndarray
    f: np.ndarray
    df: np.ndarray
    f_corner: np.ndarray
    df_corner: np.ndarray
    n: int
    jump: float
    end_mass: float
    end_mass_corner: float
    power: int = 4

    @property
    def quasilocal(self):
        return quasilocal_mass(self.f, self.df, self.n)

    @property
    def zone(self):
        return np.abs(self.rho) <= self.delta

    @property
    def c0_distance(self):
        """sup |f_delta^2 - f^2| / f^2: C^0 distance of the metrics relative to the corner one."""
        return float(np.max(np.abs(self.f**2 - self.f_corner**2) / self.f_corner**2))

    @property
    def monotone(self):
        q = self.quasilocal
        return bool(np.all(np.diff(q) >= -1e-10 * max(1.0, float(np.max(np.abs(q))))))

    def scalar_curvature(self):
        """2 (n-1) m' / (f' f^(n-1)) inside the zone, m' by centered differences of the samples."""
        q = self.quasilocal
        dm = np.gradient(q, self.rho)
        return 2.0 * (self.n - 1) * dm / (self.df * self.f ** (self.n - 1))

    def report(self):
        q = self.quasilocal[self.zone]
        return {
            "schema": "mollification/v1",
            "delta": self.delta,
            "jump_in_df": self.jump,
            "c0_distance": self.c0_distance,
            "max_abs_f_change": float(np.max(np.abs(self.f - self.f_corner))),
            "quasilocal_mass_monotone": self.monotone,
            "quasilocal_mass_zone": {"start": float(q[0]), "end": float(q[-1]), "min_step": float(np.diff(q).min())},
            "end_mass": self.end_mass,
            "end_mass_unsmoothed": self.end_mass_corner,
            "end_mass_change": abs(self.end_mass - self.end_mass_corner),
            "min_zone_scalar_curvature": float(self.scalar_curvature()[self.zone].min()),
        }


def glued_profile(corner, rho):
    """Unsmoothed (f, f') of the glued rotationally symmetric manifold at proper coordinate rho.

    rho < 0 lies in the collar (rho = -A s), rho > 0 in the exterior.
    """
    if not corner.rotationally_symmetric:
        raise MalformedInputError("the glued profile exists only for rotationally symmetric pieces")
    collar, ext = corner.collar, corner.exterior
    rho = np.asarray(rho, dtype=float)
    f = np.empty_like(rho)
    df = np.empty_like(rho)
    inside = rho < 0
    if np.any(inside):
        if collar.degenerate:
            raise MalformedInputError("degenerate collar has no interior")
        a = float(collar.A.values[0])
        s = -rho[inside] / a
        view = collar.reversed
        f[inside] = view.v_at(s)
        df[inside] = -view.v_at(s, nu=1) / a
    out = ~inside
    if np.any(out):
        f[out] = ext.f_at(rho[out])
        df[out] = ext.df_at(rho[out])
    return f, df


def collar_proper_length(corner):
    return 0.0 if corner.collar.degenerate else float(corner.collar.A.values[0]) * corner.collar.s_o


def mollify_corner(corner, delta, power=4, samples=2001, allow_violation=False):
    """Smooth the jump of f' across Sigma with an even polynomial bump of width ``delta``.

    Only the jump is mollified: f'_delta = f' + J (Phi_delta - 1_{rho >= 0}),
    with J = f'_+ - f'_- and Phi_delta the bump CDF; f_delta integrates it
    from rho = -delta.  Because the bump is
    even, f_delta agrees with f outside |rho| < delta and the end is untouched.
    """
    if not corner.rotationally_symmetric:
        raise MalformedInputError("mollification is implemented for rotationally symmetric corners only")
    if not corner.corner_ok and not allow_violation:
        raise CornerConditionError("corner condition violated; smoothing would create a negative-mass dip")
    length_in = collar_proper_length(corner)
    length_out = corner.exterior.S_max
    if not 0 < delta < 0.5 * min(length_in, length_out):
        raise MalformedInputError(
            f"delta={delta!r} must be positive and below half the shorter piece ({0.5 * min(length_in, length_out)!r})")
    n = corner.exterior.n
    r_o = corner.exterior.r_o
    jump = (float(corner.H_plus[0]) - float(corner.H_minus[0])) * r_o / (n - 1)
    rho = np.linspace(-2.0 * delta, 2.0 * delta, samples)
    rho = np.unique(np.concatenate([rho, [0.0]]))
    f, df = glued_profile(corner, rho)
    t = rho / delta
    df_s = df + jump * (bump_cdf(t, power) - (rho >= 0))
    f_s = f + jump * delta * _bump_cdf_integral(t, power)
    end = manifold_adm_mass(corner.exterior, strict=False).mass
    # beyond the zone the smoothed profile is the unsmoothed one, so the end
    # mass is read off the same far samples
    ext = corner.exterior
    far_f = ext.f[-1] + jump * delta * float(_bump_cdf_integral(ext.S_max / delta, power))
    end_s = quasilocal_mass(far_f, ext.df[-1], n)
    return MollifiedCorner(delta, rho, f_s, df_s, f, df, n, jump, float(end_s), float(end), power)


def random_mass_function(rng, n, r_o, constant=False, pieces=4):
    """Seeded nondecreasing piecewise-linear mass function that stays feasible.

    Values stay below 0.95 r_o^(n-2) / 2, so 2m/f^(n-2) <= 0.95 along the
    whole (increasing) profile.  ``constant`` gives a single-value table.
    """
    cap = 0.475 * r_o ** (n - 2)
    m0 = float(rng.uniform(0.05, 0.6)) * cap
    if constant:
        return PiecewiseLinearMass([[0.0, m0]])
    steps = rng.uniform(0.05, 1.0, pieces)
    rise = (cap - m0) * float(rng.uniform(0.2, 1.0))
    m = m0 + rise * np.concatenate([[0.0], np.cumsum(steps) / steps.sum()])
    s = np.concatenate([[0.0], np.cumsum(rng.uniform(0.2, 2.0, pieces) * r_o)])
    return PiecewiseLinearMass(np.column_stack([s, m]))
