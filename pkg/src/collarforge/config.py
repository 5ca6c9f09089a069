"""Default tolerances, overridable through the ``COLLARFORGE_TOL`` env var.

Accepted forms::

    COLLARFORGE_TOL=1e-9                       # sets ``algebraic``
    COLLARFORGE_TOL="algebraic=1e-9,ode=1e-7"  # per-key overrides
"""

import os

from .errors import MalformedInputError

DEFAULTS = {
    # identities that hold up to rounding
    "algebraic": 1e-10,
    # quantities coupled to the profile ODE
    "ode": 1e-8,
    # half-width of the band in which a strict-inequality margin counts as zero
    "equality_band": 1e-9,
    # sampled nonnegativity of the scalar curvature
    "curvature": 1e-6,
    # ADM mass vs. lower bound comparisons
    "mass": 1e-6,
    # 1 - f' at the outer end of an exterior profile
    "flat": 1e-6,
}

ENV_VAR = "COLLARFORGE_TOL"


def tolerances(env=None):
    """Return the tolerance table with env overrides applied."""
    env = os.environ if env is None else env
    tol = dict(DEFAULTS)
    raw = env.get(ENV_VAR, "").strip()
    if not raw:
        return tol
    if "=" not in raw:
        tol["algebraic"] = _parse(raw)
        return tol
    for item in raw.split(","):
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in tol:
            raise MalformedInputError(f"unknown tolerance key {key!r} in {ENV_VAR}")
        tol[key] = _parse(value)
    return tol


def _parse(value):
    try:
        out = float(value)
    except ValueError:
        raise MalformedInputError(f"cannot parse tolerance {value!r} from {ENV_VAR}") from None
    if not out > 0:
        raise MalformedInputError(f"tolerances must be positive, got {value!r}")
    return out
