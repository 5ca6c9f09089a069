"""Dimensional constants, warped-product curvature and quasi-local mass.

Everything here is a pure function of its inputs.  The finite-difference
curvature routine is deliberately generic (any coordinate metric sampler) so
it can serve as an independent oracle for the closed-form curvature formulas
used elsewhere in the package.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import MalformedInputError, SingularMetricError

MIN_DIM = 3
MAX_DIM = 7

# Gamma(n/2) for the admissible dimensions; no general special function needed.
_SQRT_PI = math.sqrt(math.pi)
_GAMMA_HALF_N = {
    3: _SQRT_PI / 2.0,
    4: 1.0,
    5: 3.0 * _SQRT_PI / 4.0,
    6: 2.0,
    7: 15.0 * _SQRT_PI / 8.0,
}


def check_dim(n):
    """Validate an ambient dimension and return it as an int."""
    if isinstance(n, bool) or int(n) != n:
        raise MalformedInputError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if not MIN_DIM <= n <= MAX_DIM:
        raise MalformedInputError(f"dimension n={n} outside supported range [{MIN_DIM}, {MAX_DIM}]")
    return n


def unit_sphere_area(n):
    """Area of the unit (n-1)-sphere in R^n, 2 pi^(n/2) / Gamma(n/2)."""
    n = check_dim(n)
    return 2.0 * math.pi ** (n / 2.0) / _GAMMA_HALF_N[n]


def area_radius(area, n):
    """Radius of the round (n-1)-sphere with the given area."""
    if not area > 0:
        raise MalformedInputError(f"area must be positive, got {area!r}")
    return (area / unit_sphere_area(n)) ** (1.0 / (n - 1))


def sphere_area(radius, n):
    return unit_sphere_area(n) * radius ** (n - 1)


def quasilocal_mass(f, fprime, n):
    """Quasi-local mass f^(n-2) (1 - f'^2) / 2 of a slice of ds^2 + f^2 g_*.

    Works elementwise on arrays.  Negative values are returned as-is; they
    flag profiles that cannot come from a nonnegative-mass slice.
    """
    f = np.asarray(f, dtype=float)
    fprime = np.asarray(fprime, dtype=float)
    out = 0.5 * f ** (n - 2) * (1.0 - fprime * fprime)
    return float(out) if out.ndim == 0 else out


def warped_scalar_curvature(f, fprime, fsecond, n, fiber_scalar=None):
    """Scalar curvature of ds^2 + f(s)^2 g for a fiber metric g of dimension n-1.

    ``fiber_scalar`` is the scalar curvature of g; the unit round sphere
    ((n-1)(n-2)) is used when omitted.
    """
    if fiber_scalar is None:
        fiber_scalar = (n - 1) * (n - 2)
    f = np.asarray(f, dtype=float)
    return (fiber_scalar - (n - 1) * (n - 2) * np.square(fprime)) / f**2 - 2.0 * (n - 1) * np.asarray(fsecond) / f


@dataclass(frozen=True)
class WarpedMetricSample:
    """One sample of A(x)^2 ds^2 + f^2 * (fiber metric) at coordinate s."""

    s: float
    lapse: float
    warp: float
    fiber_metric_scale: float = 1.0

    def __post_init__(self):
        if not (self.lapse > 0 and self.warp > 0):
            raise SingularMetricError(f"singular warped metric sample: A={self.lapse}, f={self.warp}")

    @property
    def fiber_factor(self):
        """Total factor multiplying the fiber metric, f^2 times the scale."""
        return self.warp**2 * self.fiber_metric_scale


# ---------------------------------------------------------------------------
# finite-difference curvature oracle


def _metric_derivatives(metric, points, h):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    npts, dim = points.shape
    g0 = metric(points)
    eye = np.eye(dim) * h
    plus = [metric(points + eye[k]) for k in range(dim)]
    minus = [metric(points - eye[k]) for k in range(dim)]
    dg = np.empty((npts, dim, dim, dim))
    ddg = np.empty((npts, dim, dim, dim, dim))
    for k in range(dim):
        dg[:, k] = (plus[k] - minus[k]) / (2.0 * h)
        ddg[:, k, k] = (plus[k] - 2.0 * g0 + minus[k]) / (h * h)
        for l in range(k + 1, dim):
            d = eye[k] + eye[l]
            e = eye[k] - eye[l]
            mixed = (metric(points + d) - metric(points + e) - metric(points - e) + metric(points - d)) / (4.0 * h * h)
            ddg[:, k, l] = mixed
            ddg[:, l, k] = mixed
    return g0, dg, ddg


def scalar_curvature_fd(metric, points, h):
    """Scalar curvature of a coordinate metric by centered finite differences.

    Parameters
    ----------
    metric : callable
        Maps an array of coordinate points of shape (P, d) to metric
        components of shape (P, d, d).
    points : array_like, shape (P, d)
        Evaluation points; the stencil reaches ``h`` along every axis.
    h : float
        Finite-difference step.  The result carries O(h^2) error.

    Returns
    -------
    ndarray, shape (P,)
    """
    if not h > 0:
        raise MalformedInputError(f"finite-difference step must be positive, got {h!r}")
    g, dg, ddg = _metric_derivatives(metric, points, h)
    ginv = np.linalg.inv(g)
    # Christoffel symbols of the first kind, G[d,b,c] = Gamma_{d b c}
    first = 0.5 * (np.einsum("pbdc->pdbc", dg) + np.einsum("pcdb->pdbc", dg) - dg)
    gamma = np.einsum("pad,pdbc->pabc", ginv, first)
    # derivatives of the above: d_e G[d,b,c]
    dfirst = 0.5 * (
        np.einsum("pebdc->pedbc", ddg) + np.einsum("pecdb->pedbc", ddg) - ddg
    )
    dginv = -np.einsum("pax,pexy,pyd->pead", ginv, dg, ginv)
    dgamma = np.einsum("pead,pdbc->peabc", dginv, first) + np.einsum("pad,pedbc->peabc", ginv, dfirst)
    ricci = (
        np.einsum("paabc->pbc", dgamma)
        - np.einsum("pcaba->pbc", dgamma)
        + np.einsum("paad,pdbc->pbc", gamma, gamma)
        - np.einsum("pacd,pdba->pbc", gamma, gamma)
    )
    return np.einsum("pbc,pbc->p", ginv, ricci)


class RoundFiber:
    """Round metric of radius ``radius`` on S^k in hyperspherical angles.

    Coordinates (phi_1, ..., phi_k); phi_1..phi_{k-1} are polar, phi_k azimuthal.
    """

    def __init__(self, k, radius=1.0):
        self.k = int(k)
        self.radius = float(radius)

    def metric(self, x):
        x = np.asarray(x, dtype=float)
        diag = np.empty(x.shape)
        acc = np.full(x.shape[:-1], self.radius**2)
        for i in range(self.k):
            diag[..., i] = acc
            acc = acc * np.sin(x[..., i]) ** 2
        return diag[..., :, None] * np.eye(self.k)

    @property
    def scalar_curvature(self):
        return self.k * (self.k - 1) / self.radius**2


class AxisymS2Fiber:
    """Axisymmetric metric e^{2w(theta)} rho^2 (dtheta^2 + sin^2 theta dphi^2) on S^2."""

    k = 2

    def __init__(self, conformal_factor, radius=1.0):
        self.conformal_factor = conformal_factor
        self.radius = float(radius)

    def metric(self, x):
        x = np.asarray(x, dtype=float)
        scale = self.radius**2 * np.exp(2.0 * self.conformal_factor(x[..., 0]))
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = scale
        out[..., 1, 1] = scale * np.sin(x[..., 0]) ** 2
        return out


def warped_metric(lapse, warp, fiber):
    """Coordinate sampler for A(x)^2 ds^2 + f(s)^2 g_fiber on coordinates (s, x).

    ``lapse`` takes fiber coordinates of shape (..., k) and returns (...);
    a float is accepted for constant lapse.  ``warp`` takes s values.
    """
    k = fiber.k

    def metric(points):
        points = np.asarray(points, dtype=float)
        s = points[..., 0]
        x = points[..., 1:]
        a = np.broadcast_to(lapse(x) if callable(lapse) else float(lapse), s.shape)
        f = np.asarray(warp(s), dtype=float)
        if np.any(a <= 0) or np.any(f <= 0):
            raise SingularMetricError("nonpositive lapse or warp in metric sample")
        out = np.zeros(points.shape[:-1] + (k + 1, k + 1))
        out[..., 0, 0] = a * a
        out[..., 1:, 1:] = (f * f)[..., None, None] * fiber.metric(x)
        return out

    return metric


def warped_scalar_curvature_fd(lapse, warp, fiber, s, x, h=None, scale=1.0):
    """FD scalar curvature of A(x)^2 ds^2 + f(s)^2 g_fiber at points (s_i, x_i).

    ``h`` defaults to 1e-3 times ``scale`` (a characteristic length of the
    metric).  Raises SingularMetricError on nonpositive A or f.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    x = np.asarray(x, dtype=float).reshape(len(s), fiber.k)
    if h is None:
        h = 1e-3 * scale
    points = np.column_stack([s, x])
    return scalar_curvature_fd(warped_metric(lapse, warp, fiber), points, h)


def observed_order(steps, errors):
    """Least-squares slope of log(error) against log(step)."""
    steps = np.log(np.asarray(steps, dtype=float))
    errors = np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(steps, errors, 1)[0])
