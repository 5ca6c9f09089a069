"""The Schwarzschild warping profile u_m(s) and its reversal v_m(s) = u_m(s_o - s).

u_m is the areal radius of the spatial Schwarzschild manifold as a function of
proper distance s from the horizon:

    u'' = (n-2) m / u^(n-1),   u(0) = r_m = (2m)^(1/(n-2)),   u'(0) = 0,

with first integral u'^2 = 1 - 2m / u^(n-2).  The second-order form is regular
at the horizon and is the one integrated; the first-order form is only used
as a residual check.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import BPoly

from .errors import ConvergenceError, MalformedInputError
from .geometry import check_dim

DEFAULT_SAMPLES = 2048
# near-horizon window where the quartic Taylor expansion is the reference
SEED_WINDOW = 1e-3


def horizon_radius(m, n):
    """r_m = (2m)^(1/(n-2))."""
    n = check_dim(n)
    if not m > 0:
        raise MalformedInputError(f"mass must be positive, got {m!r}")
    return (2.0 * m) ** (1.0 / (n - 2))


def _check_outside(m, r_o, n):
    r_m = horizon_radius(m, n)
    if not r_o > r_m:
        raise MalformedInputError(f"no collar: boundary inside horizon (r_o={r_o!r} <= r_m={r_m!r})")
    return r_m


def proper_length(m, r_o, n, rtol=1e-12):
    """s_o = integral from r_m to r_o of (1 - 2m/r^(n-2))^(-1/2) dr.

    With r = r_m + t^2 the integrand becomes 2 sqrt(r^(n-2) / S(r)), where
    r^(n-2) - r_m^(n-2) = (r - r_m) S(r); it is smooth up to t = 0, so plain
    adaptive quadrature reaches the requested tolerance.
    """
    n = check_dim(n)
    r_m = _check_outside(m, r_o, n)
    k = n - 2

    def integrand(t):
        r = r_m + t * t
        geometric = sum(r**j * r_m ** (k - 1 - j) for j in range(k))
        return 2.0 * math.sqrt(r**k / geometric)

    value, err = quad(integrand, 0.0, math.sqrt(r_o - r_m), epsabs=0.0, epsrel=rtol, limit=200)
    if not err <= max(1e-10 * abs(value), 1e-15):
        raise ConvergenceError("proper length quadrature missed its tolerance", {"value": value, "error": err})
    return value


def taylor_seed(m, n, s):
    """Quartic Taylor expansion of u_m about the horizon.

    u = r_m + (u''(0)/2) s^2 + (u''''(0)/24) s^4 with u''(0) = (n-2) m / r_m^(n-1)
    and u''''(0) = -(n-1)(n-2)^2 m^2 / r_m^(2n-1).  Returns (u, u').
    """
    r_m = horizon_radius(m, n)
    c2 = 0.5 * (n - 2) * m / r_m ** (n - 1)
    c4 = -(n - 1) * (n - 2) ** 2 * m * m / r_m ** (2 * n - 1) / 24.0
    s = np.asarray(s, dtype=float)
    return r_m + c2 * s**2 + c4 * s**4, 2.0 * c2 * s + 4.0 * c4 * s**3


def _rk4_march(m, n, u, du, h, steps):
    """Classical RK4 for (u, u') with u'' = (n-2) m / u^(n-1); returns arrays incl. start."""
    k = (n - 2) * m
    p = n - 1
    us = [u]
    dus = [du]
    for _ in range(steps):
        a1 = k / u**p
        u2 = u + 0.5 * h * du
        d2 = du + 0.5 * h * a1
        a2 = k / u2**p
        u3 = u + 0.5 * h * d2
        d3 = du + 0.5 * h * a2
        a3 = k / u3**p
        u4 = u + h * d3
        d4 = du + h * a3
        a4 = k / u4**p
        u = u + h * (du + 2.0 * d2 + 2.0 * d3 + d4) / 6.0
        du = du + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        us.append(u)
        dus.append(du)
    return us, dus


def _bracket_length(m, r_o, n, r_m):
    """Coarse shooting for s with u(s) = r_o: march, then Newton on the last step."""
    h = min(r_m, r_o - r_m) / 64.0
    u, du, s = r_m, 0.0, 0.0
    while True:
        us, dus = _rk4_march(m, n, u, du, h, 1)
        if us[1] >= r_o:
            break
        u, du, s = us[1], dus[1], s + h
    delta = h * (r_o - u) / (us[1] - u)
    for _ in range(50):
        us, dus = _rk4_march(m, n, u, du, delta, 1)
        step = (r_o - us[1]) / dus[1]
        delta += step
        if abs(step) <= 1e-15 * max(1.0, s):
            break
    return s + delta


@dataclass(frozen=True)
class SchwarzschildProfile:
    """Samples (s_i, u_i, u'_i) of u_m on [0, s_o] with u(s_o) = r_o."""

    n: int
    m: float
    r_m: float
    r_o: float
    s_o: float
    s: np.ndarray
    u: np.ndarray
    du: np.ndarray
    substeps: int = 1
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def ddu(self):
        return (self.n - 2) * self.m / self.u ** (self.n - 1)

    @property
    def first_integral_residual(self):
        """max |u'^2 + 2m/u^(n-2) - 1| over samples."""
        return float(np.max(np.abs(self.du**2 + 2.0 * self.m / self.u ** (self.n - 2) - 1.0)))

    @property
    def first_order_residual(self):
        """max |u' - sqrt(1 - 2m/u^(n-2))|, split at the horizon seed window.

        Inside s < SEED_WINDOW * r_m the square root is dominated by rounding,
        so there the samples are compared with the quartic Taylor seed instead.
        """
        window = self.s < SEED_WINDOW * self.r_m
        root = np.sqrt(np.maximum(1.0 - 2.0 * self.m / self.u ** (self.n - 2), 0.0))
        outer = np.abs(self.du - root)[~window]
        seed_u, seed_du = taylor_seed(self.m, self.n, self.s[window])
        inner = np.concatenate([np.abs(self.u[window] - seed_u), np.abs(self.du[window] - seed_du)])
        return float(max(outer.max(initial=0.0), inner.max(initial=0.0)))

    @property
    def endpoint_residual(self):
        return abs(float(self.u[-1]) - self.r_o)

    def _interp(self):
        cached = self.__dict__.get("_bpoly")
        if cached is None:
            cached = BPoly.from_derivatives(self.s, np.column_stack([self.u, self.du, self.ddu]))
            object.__setattr__(self, "_bpoly", cached)
        return cached

    def u_at(self, s, nu=0):
        """u (or its nu-th derivative) between samples by C^2 quintic Hermite interpolation."""
        s = np.asarray(s, dtype=float)
        if np.any(s < -1e-12 * self.s_o) or np.any(s > self.s_o * (1 + 1e-12)):
            raise MalformedInputError("s outside [0, s_o]")
        return self._interp()(np.clip(s, 0.0, self.s_o), nu)

    def reversed(self):
        return ReversedProfile(self)

    def as_rows(self):
        return np.column_stack([self.s, self.u, self.du])


class ReversedProfile:
    """View v(s) = u(s_o - s) of a profile; v(0) = r_o, v(s_o) = r_m."""

    def __init__(self, profile):
        self.profile = profile
        self.s = profile.s
        self.v = profile.u[::-1].copy()
        self.dv = -profile.du[::-1]

    @property
    def s_o(self):
        return self.profile.s_o

    def v_at(self, s, nu=0):
        s = np.asarray(s, dtype=float)
        sign = -1.0 if nu % 2 else 1.0
        return sign * self.profile.u_at(self.s_o - s, nu)

    def lapse_factor_at(self, s):
        """1 - 2m/v^(n-2) = u'(s_o - s)^2, computed as 1 - (r_m/v)^(n-2).

        Vanishes exactly at s = s_o, where v equals r_m by construction.
        """
        p = self.profile
        s = np.asarray(s, dtype=float)
        v = self.v_at(s)
        out = np.where(s >= p.s_o, 0.0, np.maximum(1.0 - (p.r_m / v) ** (p.n - 2), 0.0))
        return float(out) if out.ndim == 0 else out


reversed_profile = ReversedProfile


def solve_profile(m, r_o, n, samples=DEFAULT_SAMPLES, residual_tol=1e-11, max_substeps=64):
    """Integrate u_m from the horizon out to u = r_o on a uniform grid of ``samples`` steps.

    s_o is found by shooting (RK4 march plus Newton on the last step), then
    refined by re-integrating on the uniform grid and correcting s_o with the
    endpoint mismatch.  Each grid step is split into ``substeps`` RK4 steps,
    doubled until the first integral holds to ``residual_tol``.
    """
    n = check_dim(n)
    r_m = _check_outside(m, r_o, n)
    samples = int(samples)
    if samples < 8:
        raise MalformedInputError("need at least 8 profile samples")
    s_o = _bracket_length(m, r_o, n, r_m)
    substeps = 1
    while True:
        for _ in range(8):
            h = s_o / (samples * substeps)
            us, dus = _rk4_march(m, n, r_m, 0.0, h, samples * substeps)
            mismatch = r_o - us[-1]
            if abs(mismatch) <= 1e-14 * r_o:
                break
            s_o += mismatch / dus[-1]
        u = np.asarray(us[::substeps])
        du = np.asarray(dus[::substeps])
        residual = float(np.max(np.abs(du**2 + 2.0 * m / u ** (n - 2) - 1.0)))
        if residual <= residual_tol:
            break
        if substeps >= max_substeps:
            raise ConvergenceError("profile integration missed the first-integral tolerance",
                                   {"residual": residual, "substeps": substeps})
        substeps *= 2
    if abs(u[-1] - r_o) > 1e-8 * r_o:
        raise ConvergenceError("profile endpoint missed r_o", {"u_end": float(u[-1]), "r_o": r_o})
    s = np.linspace(0.0, s_o, samples + 1)
    return SchwarzschildProfile(n, float(m), r_m, float(r_o), float(s_o), s, u, du, substeps,
                                {"first_integral_residual": residual, "endpoint_mismatch": float(u[-1] - r_o)})
