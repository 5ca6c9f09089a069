"""ADM mass of an asymptotically flat coordinate metric by flux integrals.

The flux (h_ij,i - h_ii,j) nu^j is integrated over coordinate spheres S_r with
a product Gauss rule, evaluated at several radii, and extrapolated to r -> oo
in the leading decay rate r^-(2p - n + 2).
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import roots_jacobi

from .errors import ConvergenceError, MalformedInputError
from .geometry import check_dim, unit_sphere_area

# 5-point centered first-derivative stencil
_STENCIL_OFFSETS = (-2.0, -1.0, 1.0, 2.0)
_STENCIL_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)


@dataclass(frozen=True)
class AsymptoticMetricSpec:
    """Closed-form metric h_ij(x) on R^n minus the ball of radius ``inner_radius``.

    ``metric`` maps points of shape (P, n) to components of shape (P, n, n).
    ``decay`` is the pair (p, q): h - delta = O(|x|^-p), R_h = O(|x|^-q).
    """

    n: int
    metric: object
    decay: tuple
    inner_radius: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        n = check_dim(self.n)
        p, q = self.decay
        if not p > (n - 2) / 2.0:
            raise MalformedInputError(f"decay exponent p={p} must exceed (n-2)/2={(n - 2) / 2}")
        if not q > n:
            raise MalformedInputError(f"curvature decay q={q} must exceed n={n}")
        if self.inner_radius < 0:
            raise MalformedInputError("inner_radius must be nonnegative")

    @property
    def rate(self):
        """Leading exponent k in raw_mass(r) = m + c r^-k."""
        p = self.decay[0]
        return 2.0 * p - self.n + 2.0


def flat_metric_spec(n):
    n = check_dim(n)

    def metric(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n)).copy()

    return AsymptoticMetricSpec(n, metric, decay=(float(n), 2.0 * n + 1.0), inner_radius=0.0, name="flat")


def isotropic_schwarzschild_spec(n, m):
    """(1 + m / (2|x|^(n-2)))^(4/(n-2)) delta_ij, the Schwarzschild metric in isotropic form."""
    n = check_dim(n)
    m = float(m)
    power = 4.0 / (n - 2)

    def metric(x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        phi = (1.0 + 0.5 * m / r ** (n - 2)) ** power
        return phi[..., None, None] * np.eye(n)

    inner = (abs(m) / 2.0) ** (1.0 / (n - 2))
    return AsymptoticMetricSpec(
        n, metric, decay=(float(n - 2), 2.0 * n + 1.0), inner_radius=inner, name="isotropic_schwarzschild"
    )


def radial_metric_spec(n, stretch, decay, inner_radius, name="radial"):
    """delta_ij + stretch(|x|) x_i x_j / |x|^2 for a radial function ``stretch``.

    A rotationally symmetric metric dr^2 / f'^2 + r^2 g_* written in areal
    Cartesian coordinates has stretch = 1/f'^2 - 1.
    """
    n = check_dim(n)

    def metric(x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        xhat = x / r[..., None]
        return np.eye(n) + np.asarray(stretch(r))[..., None, None] * xhat[..., :, None] * xhat[..., None, :]

    return AsymptoticMetricSpec(n, metric, decay=decay, inner_radius=inner_radius, name=name)


def sphere_quadrature(n, order):
    """Nodes on the unit (n-1)-sphere in R^n and weights summing to omega_{n-1}.

    Polar angles use Gauss-Jacobi nodes in cos(phi) so that the sin^k volume
    factor is absorbed exactly; the azimuth uses the periodic trapezoid rule.
    Polynomials in x of degree < 2*order are integrated exactly.
    """
    n = check_dim(n)
    coords, weights = [], []
    for k in range(n - 2):
        alpha = (n - 3 - k) / 2.0
        t, w = roots_jacobi(order, alpha, alpha)
        coords.append(np.arccos(t))
        weights.append(w)
    naz = 2 * order
    coords.append(2.0 * np.pi * np.arange(naz) / naz)
    weights.append(np.full(naz, 2.0 * np.pi / naz))
    angles = [g.ravel() for g in np.meshgrid(*coords, indexing="ij")]
    wts = np.prod([g.ravel() for g in np.meshgrid(*weights, indexing="ij")], axis=0)
    nodes = np.empty((angles[0].size, n))
    acc = np.ones_like(angles[0])
    for k in range(n - 1):
        nodes[:, k] = acc * np.cos(angles[k])
        acc = acc * np.sin(angles[k])
    nodes[:, n - 1] = acc
    return nodes, wts


def _flux_integrand(spec, points, nu, step):
    n = spec.n
    npts = len(points)
    div = np.zeros((npts, n))
    grad_trace = np.zeros((npts, n))
    for k in range(n):
        dh = np.zeros((npts, n, n))
        for off, wt in zip(_STENCIL_OFFSETS, _STENCIL_WEIGHTS):
            shifted = points.copy()
            shifted[:, k] += off * step
            dh += wt * spec.metric(shifted)
        dh /= step
        div += dh[:, k, :]
        grad_trace[:, k] = np.trace(dh, axis1=1, axis2=2)
    return np.einsum("pj,pj->p", div - grad_trace, nu)


def _check_metric(spec, points):
    h = spec.metric(points)
    if not np.allclose(h, np.swapaxes(h, 1, 2), rtol=0, atol=1e-12):
        raise MalformedInputError(f"metric {spec.name!r} is not symmetric at sampled points")
    try:
        np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        raise MalformedInputError(f"metric {spec.name!r} is not positive definite at sampled points") from None


def raw_mass(spec, radius, order=4, step_ratio=1e-3, quad_tol=1e-8, max_order=10):
    """Flux integral at one coordinate sphere, normalized to a mass.

    The quadrature order is raised until two successive orders agree to
    ``quad_tol`` relative to the integrand scale.  Returns the mass at the
    higher order of the agreeing pair, and the lower order (a good starting
    point for the next radius).
    """
    n = spec.n
    norm = 1.0 / (2.0 * (n - 1) * unit_sphere_area(n))
    step = step_ratio * radius
    previous = None
    while True:
        nodes, weights = sphere_quadrature(n, order)
        points = radius * nodes
        _check_metric(spec, points)
        integrand = _flux_integrand(spec, points, nodes, step) * radius ** (n - 1)
        value = norm * float(np.dot(weights, integrand))
        scale = norm * float(np.dot(weights, np.abs(integrand)))
        if previous is not None and abs(value - previous[0]) <= quad_tol * max(scale, 1e-300):
            return value, previous[1]
        if scale == 0.0:
            return value, order
        if order >= max_order:
            raise ConvergenceError(
                f"sphere quadrature did not settle at r={radius} by order {max_order}",
                {"radius": radius, "value": value, "previous": previous},
            )
        previous = (value, order)
        order += 1


def _neville_at_zero(x, y):
    """Value at x=0 of the interpolating polynomial through (x_i, y_i)."""
    p = list(map(float, y))
    x = list(map(float, x))
    k = len(x)
    for level in range(1, k):
        for i in range(k - level):
            j = i + level
            p[i] = (x[j] * p[i] - x[i] * p[i + 1]) / (x[j] - x[i])
    return p[0]


@dataclass
class AdmResult:
    mass: float
    radii: list
    raw: list
    pairwise: list
    spread: float
    rate: float
    orders: list
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "mass": self.mass,
            "radii": list(self.radii),
            "raw": list(self.raw),
            "pairwise_extrapolants": list(self.pairwise),
            "spread": self.spread,
            "rate": self.rate,
            "quadrature_orders": list(self.orders),
            "converged": self.converged,
        }


def adm_mass(spec, radii, rtol=1e-3, atol=1e-8, step_ratio=1e-3, strict=True):
    """ADM mass of ``spec`` from flux integrals at ``radii``, extrapolated to infinity.

    The raw values are modelled as m + c1 x + c2 x^2 + ... with x = r^-k,
    k = 2p - n + 2, and extrapolated to x = 0 through all radii.  Two-point
    extrapolants from consecutive radii serve as the convergence diagnostic:
    if their spread exceeds ``rtol * |m| + atol`` a ConvergenceError is raised
    (or the result is returned with ``converged=False`` when ``strict`` is off).
    """
    radii = [float(r) for r in radii]
    if len(radii) < 3:
        raise MalformedInputError("at least three radii are needed for the extrapolation")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise MalformedInputError("radii must be strictly increasing")
    if radii[0] < 2.0 * spec.inner_radius or radii[0] <= 0:
        raise MalformedInputError(
            f"smallest radius {radii[0]} must be at least twice the excluded radius {spec.inner_radius}"
        )
    raw, orders = [], []
    order = 4
    for r in radii:
        value, order = raw_mass(spec, r, order=order, step_ratio=step_ratio)
        raw.append(value)
        orders.append(order)
    k = spec.rate
    x = [r**-k for r in radii]
    pairwise = [_neville_at_zero(x[i : i + 2], raw[i : i + 2]) for i in range(len(x) - 1)]
    estimate = _neville_at_zero(x, raw)
    spread = max(pairwise) - min(pairwise)
    converged = bool(spread <= rtol * abs(estimate) + atol) and math.isfinite(estimate)
    result = AdmResult(estimate, radii, raw, pairwise, spread, k, orders, converged)
    if strict and not converged:
        raise ConvergenceError("mass not converged", result.as_dict())
    return result
