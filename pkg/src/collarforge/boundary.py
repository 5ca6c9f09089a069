"""Boundary data (Sigma^{n-1}, g, H): fields, Laplace-Beltrami, admissibility, collar parameters.

Three sample backends are supported:

``homogeneous``
    R_g and H constant; a single sample carries the whole surface.
``axisym_s2``
    n = 3, an axisymmetric metric e^{2w(theta)} rho^2 (dtheta^2 + sin^2 theta dphi^2)
    sampled on a uniform latitude grid (cell-centered or pole-inclusive).
``tabulated``
    Arbitrary samples of R_g and H with a caller-supplied Laplacian of 1/H.
    Samples are treated as carrying equal area.
"""

from dataclasses import dataclass, field as dc_field
from enum import Enum
import math

import numpy as np
from scipy.fft import dct

from .config import tolerances
from .errors import InadmissibleDataError, MalformedInputError
from .geometry import area_radius, check_dim, unit_sphere_area

SCHEMA = "boundary_data/v1"


@dataclass(frozen=True)
class BoundaryField:
    """Sample-aligned values with a units note (geometric units, G = c = 1)."""

    values: np.ndarray
    units: str = ""

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(values)):
            raise MalformedInputError("boundary field contains non-finite values")
        object.__setattr__(self, "values", values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return len(self.values)


class BoundaryData:
    """Common interface of the three backends.

    Subclasses provide ``n``, ``area``, ``R_g`` and ``H`` (arrays aligned to
    the samples), ``weights`` (area weights summing to ``area``) and
    ``laplacian(values)``.
    """

    backend = None

    @property
    def r_o(self):
        return area_radius(self.area, self.n)

    @property
    def size(self):
        return len(self.H)

    def integrate(self, values):
        return float(np.dot(self.weights, np.broadcast_to(values, self.H.shape)))

    def field(self, values, units=""):
        values = np.broadcast_to(np.asarray(values, dtype=float), self.H.shape)
        return BoundaryField(values.copy(), units)

    def lap_inverse_H(self):
        """Delta(1/H) on the samples; requires H > 0."""
        if np.any(self.H <= 0):
            raise InadmissibleDataError("Delta(1/H) needs H > 0 at every sample")
        return self.laplacian(1.0 / self.H)

    def boundary_witness(self, index):
        """True when a sample index sits on the edge of the sample set."""
        return False

    def _check_common(self):
        check_dim(self.n)
        if not self.area > 0:
            raise MalformedInputError(f"area must be positive, got {self.area!r}")
        if self.R_g.shape != self.H.shape:
            raise MalformedInputError("R_g and H must be aligned to the same samples")
        if not (np.all(np.isfinite(self.R_g)) and np.all(np.isfinite(self.H))):
            raise MalformedInputError("R_g and H must be finite")


class HomogeneousData(BoundaryData):
    """Constant R_g and H over a surface of the given area."""

    backend = "homogeneous"

    def __init__(self, n, area, R_g, H):
        self.n = check_dim(n)
        self.area = float(area)
        self.R_g = np.array([float(R_g)])
        self.H = np.array([float(H)])
        self._check_common()

    @property
    def weights(self):
        return np.array([self.area])

    def laplacian(self, values):
        values = np.broadcast_to(np.asarray(values, dtype=float), self.H.shape)
        return np.zeros_like(values)

    def scaled(self, lam):
        return HomogeneousData(self.n, lam ** (self.n - 1) * self.area, self.R_g[0] / lam**2, self.H[0] / lam)

    def to_json(self):
        return {"schema": SCHEMA, "n": self.n, "backend": self.backend, "area": self.area,
                "R_g": float(self.R_g[0]), "H": float(self.H[0])}

    def __repr__(self):
        return f"HomogeneousData(n={self.n}, area={self.area!r}, R_g={self.R_g[0]!r}, H={self.H[0]!r})"


def round_sphere_data(n, r_o, H):
    """Homogeneous data of a round sphere of radius r_o with constant mean curvature H."""
    n = check_dim(n)
    return HomogeneousData(n, unit_sphere_area(n) * r_o ** (n - 1), (n - 1) * (n - 2) / r_o**2, H)


def schwarzschild_sphere_data(n, m, r_o):
    """Data (g, H) induced on the sphere of area radius r_o in Schwarzschild of mass m."""
    if not r_o ** (n - 2) > 2 * m:
        raise MalformedInputError("sphere lies at or inside the horizon")
    return round_sphere_data(n, r_o, (n - 1) / r_o * math.sqrt(1.0 - 2.0 * m / r_o ** (n - 2)))


class AxisymS2Data(BoundaryData):
    """Axisymmetric boundary data on S^2 (n = 3).

    The metric is e^{2w(theta)} rho^2 round; in two dimensions the
    Laplace-Beltrami operator is then e^{-2w} rho^-2 times the round one, so
    only the round operator has to be discretized.  It is written in
    divergence form as a finite-volume stencil on the latitude grid, which
    annihilates constants exactly and integrates to zero against the area
    weights.  The pole faces carry zero flux (sin 0 = 0), the discrete form of
    even reflection at the poles.

    Parameters
    ----------
    theta : array_like
        Uniform latitude grid, either cell-centered ((i + 1/2) pi / N) or
        pole-inclusive (i pi / (N - 1)).
    H : array_like
        Mean curvature samples.
    conformal_factor : array_like, optional
        w(theta) samples; zero (round metric) by default.
    area : float, optional
        Total area; fixes rho.  Exactly one of ``area`` and ``radius`` is used.
    radius : float, optional
        rho.  Defaults to 1 when ``area`` is not given.
    R_g : array_like, optional
        Scalar curvature samples.  Computed from the metric when omitted.
    """

    backend = "axisym_s2"
    n = 3

    def __init__(self, theta, H, conformal_factor=None, area=None, radius=None, R_g=None):
        theta = np.asarray(theta, dtype=float)
        self.theta = theta
        self.grid = _classify_grid(theta)
        self.H = np.asarray(H, dtype=float)
        if self.H.shape != theta.shape:
            raise MalformedInputError("H must be sampled on theta_grid")
        w = np.zeros_like(theta) if conformal_factor is None else np.asarray(conformal_factor, dtype=float)
        if w.shape != theta.shape:
            raise MalformedInputError("conformal factor must be sampled on theta_grid")
        self.conformal_factor = w
        faces = np.concatenate([[0.0], 0.5 * (theta[1:] + theta[:-1]), [math.pi]])
        self._cell = np.cos(faces[:-1]) - np.cos(faces[1:])
        self._face_sin = np.sin(faces[1:-1])
        self._spacing = np.diff(theta)
        unit_area = 2.0 * math.pi * float(np.dot(np.exp(2.0 * w), self._cell))
        if area is not None:
            if not area > 0:
                raise MalformedInputError(f"area must be positive, got {area!r}")
            self.radius = math.sqrt(area / unit_area)
        else:
            self.radius = 1.0 if radius is None else float(radius)
        self.area = unit_area * self.radius**2
        self.metric_R_g = 2.0 * np.exp(-2.0 * w) * (1.0 - self._round_laplacian(w)) / self.radius**2
        self.R_g = self.metric_R_g.copy() if R_g is None else np.asarray(R_g, dtype=float)
        self._check_common()

    @classmethod
    def from_functions(cls, samples, H, conformal_factor=None, radius=1.0, grid="cell"):
        """Sample closed-form H(theta) (and w(theta)) on a grid of ``samples`` points."""
        theta = latitude_grid(samples, grid)
        w = None if conformal_factor is None else conformal_factor(theta)
        return cls(theta, H(theta), conformal_factor=w, radius=radius)

    def _round_laplacian(self, values):
        flux = self._face_sin * np.diff(values) / self._spacing
        out = np.zeros_like(values)
        out[:-1] += flux
        out[1:] -= flux
        return out / self._cell

    def laplacian(self, values):
        values = np.broadcast_to(np.asarray(values, dtype=float), self.theta.shape)
        return np.exp(-2.0 * self.conformal_factor) * self._round_laplacian(values) / self.radius**2

    @property
    def weights(self):
        return 2.0 * math.pi * self.radius**2 * np.exp(2.0 * self.conformal_factor) * self._cell

    def interpolant(self, values):
        """Even cosine-series interpolant theta -> value through the samples.

        Spectrally accurate for smooth axisymmetric fields; used by the
        finite-difference curvature oracle, which needs values off the grid.
        """
        values = np.asarray(values, dtype=float)
        count = len(values)
        if self.grid == "cell":
            coef = dct(values, type=2) / count
            coef[0] /= 2.0
        else:
            coef = dct(values, type=1) / (count - 1)
            coef[0] /= 2.0
            coef[-1] /= 2.0
        modes = np.arange(count)

        def evaluate(theta):
            theta = np.asarray(theta, dtype=float)
            return np.cos(theta[..., None] * modes) @ coef

        return evaluate

    def boundary_witness(self, index):
        return index in (0, len(self.theta) - 1)

    def scaled(self, lam):
        return AxisymS2Data(self.theta, self.H / lam, conformal_factor=self.conformal_factor,
                            radius=self.radius * lam, R_g=self.R_g / lam**2)

    def to_json(self):
        return {"schema": SCHEMA, "n": 3, "backend": self.backend, "area": self.area,
                "theta_grid": self.theta.tolist(), "R_g": self.R_g.tolist(), "H": self.H.tolist(),
                "conformal_factor": self.conformal_factor.tolist()}

    def __repr__(self):
        return f"AxisymS2Data(samples={len(self.theta)}, grid={self.grid!r}, radius={self.radius!r})"


def latitude_grid(samples, grid="cell"):
    samples = int(samples)
    if grid == "cell":
        return (np.arange(samples) + 0.5) * math.pi / samples
    if grid == "vertex":
        return np.arange(samples) * math.pi / (samples - 1)
    raise MalformedInputError(f"unknown grid kind {grid!r}")


def _classify_grid(theta):
    if theta.ndim != 1 or len(theta) < 3:
        raise MalformedInputError("theta_grid must be a 1-D array with at least 3 samples")
    count = len(theta)
    for kind in ("cell", "vertex"):
        if np.allclose(theta, latitude_grid(count, kind), rtol=0, atol=1e-12):
            return kind
    raise MalformedInputError("theta_grid must be uniform: cell-centered or pole-inclusive")


class TabulatedData(BoundaryData):
    """Samples of R_g and H with a stored Delta(1/H); samples carry equal area."""

    backend = "tabulated"

    def __init__(self, n, area, R_g, H, lap_H_inv=None):
        self.n = check_dim(n)
        self.area = float(area)
        self.R_g = np.atleast_1d(np.asarray(R_g, dtype=float))
        self.H = np.atleast_1d(np.asarray(H, dtype=float))
        self.lap_H_inv = None if lap_H_inv is None else np.atleast_1d(np.asarray(lap_H_inv, dtype=float))
        self._check_common()
        if self.lap_H_inv is not None and self.lap_H_inv.shape != self.H.shape:
            raise MalformedInputError("lap_H_inv must be aligned to H")

    @property
    def weights(self):
        return np.full(self.H.shape, self.area / len(self.H))

    def laplacian(self, values):
        """Delta of a constant, or of c/H + d when Delta(1/H) is stored."""
        values = np.broadcast_to(np.asarray(values, dtype=float), self.H.shape)
        if np.ptp(values) <= 1e-14 * max(1.0, float(np.max(np.abs(values)))):
            return np.zeros_like(values)
        if self.lap_H_inv is not None and np.all(self.H > 0):
            # fit values = c / H + d exactly, else refuse
            inv = 1.0 / self.H
            design = np.column_stack([inv, np.ones_like(inv)])
            (c, d), *_ = np.linalg.lstsq(design, values, rcond=None)
            if np.allclose(c * inv + d, values, rtol=1e-12, atol=1e-14 * float(np.max(np.abs(values)))):
                return c * self.lap_H_inv
        raise MalformedInputError("tabulated boundary data only stores the Laplacian of 1/H")

    def scaled(self, lam):
        lap = None if self.lap_H_inv is None else self.lap_H_inv / lam
        return TabulatedData(self.n, lam ** (self.n - 1) * self.area, self.R_g / lam**2, self.H / lam, lap)

    def to_json(self):
        doc = {"schema": SCHEMA, "n": self.n, "backend": self.backend, "area": self.area,
               "R_g": self.R_g.tolist(), "H": self.H.tolist()}
        if self.lap_H_inv is not None:
            doc["lap_H_inv"] = self.lap_H_inv.tolist()
        return doc

    def __repr__(self):
        return f"TabulatedData(n={self.n}, samples={len(self.H)}, area={self.area!r})"


def boundary_data_from_json(doc):
    """Build BoundaryData from a ``boundary_data/v1`` document (a dict)."""
    if not isinstance(doc, dict):
        raise MalformedInputError("boundary data document must be a JSON object")
    schema = doc.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise MalformedInputError(f"unsupported schema {schema!r}")
    try:
        backend = doc["backend"]
        n = doc["n"]
        if backend == "homogeneous":
            return HomogeneousData(n, doc["area"], float(doc["R_g"]), float(doc["H"]))
        if backend == "axisym_s2":
            if n != 3:
                raise MalformedInputError("axisym_s2 backend requires n = 3")
            return AxisymS2Data(doc["theta_grid"], doc["H"], conformal_factor=doc.get("conformal_factor"),
                                area=doc.get("area"), R_g=doc.get("R_g"))
        if backend == "tabulated":
            return TabulatedData(n, doc["area"], doc["R_g"], doc["H"], doc.get("lap_H_inv"))
    except KeyError as exc:
        raise MalformedInputError(f"boundary data missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MalformedInputError):
            raise
        raise MalformedInputError(f"bad boundary data: {exc}") from None
    raise MalformedInputError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# operations


def laplace_beltrami(data, field):
    """Discrete Laplace-Beltrami of a sample-aligned field."""
    values = np.asarray(field, dtype=float)
    if values.shape not in (data.H.shape, ()):
        raise MalformedInputError("field is not aligned to the boundary samples")
    return BoundaryField(data.laplacian(values), getattr(field, "units", ""))


class Verdict(str, Enum):
    ADMISSIBLE = "admissible"
    EQUALITY = "inadmissible_equality"
    VIOLATED = "inadmissible_violated"
    REQUIRES_POSITIVE_H = "requires_positive_H"


@dataclass(frozen=True)
class Admissibility:
    verdict: Verdict
    margin: float
    witness: int
    notes: tuple = dc_field(default_factory=tuple)

    @property
    def ok(self):
        return self.verdict is Verdict.ADMISSIBLE

    def as_dict(self):
        margin = self.margin if math.isfinite(self.margin) else None
        return {"verdict": self.verdict.value, "margin": margin, "witness": self.witness, "notes": list(self.notes)}


def _verdict(margin, band):
    if margin > band:
        return Verdict.ADMISSIBLE
    if margin >= -band:
        return Verdict.EQUALITY
    return Verdict.VIOLATED


def _dim_factor(n):
    return (n - 2) / (n - 1)


def _refinement_note(data, index, what):
    if data.boundary_witness(index):
        return (f"{what} attained at edge sample {index}; refine the grid to confirm",)
    return ()


def check_cmc_condition(data, band=None):
    """min R_g > ((n-2)/(n-1)) (max H)^2, the hypothesis with H_o = max H."""
    band = tolerances()["equality_band"] if band is None else band
    negative = np.flatnonzero(data.H < 0)
    if negative.size:
        return Admissibility(Verdict.REQUIRES_POSITIVE_H, math.nan, int(negative[0]),
                             (f"negative mean curvature at sample {int(negative[0])}; "
                              "an outer minimizing boundary has H >= 0",))
    h_max = float(np.max(data.H))
    witness = int(np.argmin(data.R_g))
    margin = float(data.R_g[witness]) - _dim_factor(data.n) * h_max**2
    notes = []
    if h_max == 0.0:
        notes.append("H vanishes identically: minimal boundary")
    elif np.any(data.H == 0.0):
        notes.append("H vanishes at some samples; the collar uses the constant H_o = max H")
    notes.extend(_refinement_note(data, witness, "min R_g"))
    return Admissibility(_verdict(margin, band), margin, witness, tuple(notes))


def laplacian_margin_field(data):
    """R_g - 2 H Delta(1/H) - ((n-2)/(n-1)) H^2 at every sample."""
    return data.R_g - 2.0 * data.H * data.lap_inverse_H() - _dim_factor(data.n) * data.H**2


def check_laplacian_condition(data, band=None):
    """R_g - 2 H Delta(1/H) - ((n-2)/(n-1)) H^2 > 0 pointwise, with H > 0."""
    band = tolerances()["equality_band"] if band is None else band
    bad = np.flatnonzero(data.H <= 0)
    if bad.size:
        return Admissibility(Verdict.REQUIRES_POSITIVE_H, math.nan, int(bad[0]),
                             (f"H <= 0 at sample {int(bad[0])}",))
    values = laplacian_margin_field(data)
    witness = int(np.argmin(values))
    margin = float(values[witness])
    return Admissibility(_verdict(margin, band), margin, witness, _refinement_note(data, witness, "minimum margin"))


MODES = ("cmc", "laplacian")


def check_mode(mode):
    if mode not in MODES:
        raise MalformedInputError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def admissibility(data, mode):
    check_mode(mode)
    return check_cmc_condition(data) if mode == "cmc" else check_laplacian_condition(data)


def is_minimal(data):
    return bool(np.all(data.H == 0.0))


def theta_ratio_field(data):
    """((n-2)/(n-1)) H^2 / (R_g - 2 H Delta(1/H)) per sample; theta is its max."""
    return _dim_factor(data.n) * data.H**2 / (data.R_g - 2.0 * data.H * data.lap_inverse_H())


def theta(data, mode):
    """The deficit constant theta in [0, 1) of the requested mode.

    Returns 0 for H identically zero in cmc mode (the bound reduces to the
    minimal-boundary one).  Raises InadmissibleDataError unless the
    strict inequality of the mode holds.
    """
    check_mode(mode)
    if mode == "cmc" and is_minimal(data):
        return 0.0
    adm = admissibility(data, mode)
    if not adm.ok:
        raise InadmissibleDataError(f"boundary data not admissible in {mode} mode: {adm.verdict.value}", adm)
    if mode == "cmc":
        return _dim_factor(data.n) * float(np.max(data.H)) ** 2 / float(np.min(data.R_g))
    return float(np.max(theta_ratio_field(data)))


def collar_parameters(data, theta_value, mode="laplacian"):
    """Mass m = r_o^(n-2) (1 - theta) / 2 and lapse field A of the collar.

    In cmc mode A is the constant (n-1)/(H_o r_o) sqrt(1 - 2m/r_o^(n-2)) with
    H_o = max H; in laplacian mode the same expression uses H(x) pointwise.
    For theta = 0 (minimal boundary) A is None: the collar has zero length.
    """
    check_mode(mode)
    if not 0.0 <= theta_value < 1.0:
        raise InadmissibleDataError(f"theta must lie in [0, 1), got {theta_value!r}")
    n = data.n
    r_o = data.r_o
    m = 0.5 * r_o ** (n - 2) * (1.0 - theta_value)
    if theta_value == 0.0:
        return m, None
    h = np.full(data.H.shape, float(np.max(data.H))) if mode == "cmc" else data.H
    if np.any(h <= 0):
        raise InadmissibleDataError("the lapse A needs H > 0")
    lapse = (n - 1) / (h * r_o) * math.sqrt(lapse_factor(m, r_o, n))
    return m, BoundaryField(lapse, "dimensionless")


def lapse_factor(m, r, n):
    """1 - 2m / r^(n-2), clamped at zero against rounding at the horizon."""
    value = 1.0 - 2.0 * m / np.asarray(r, dtype=float) ** (n - 2)
    value = np.maximum(value, 0.0)
    return float(value) if np.ndim(value) == 0 else value
