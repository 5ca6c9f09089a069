"""Command line interface: ``collarforge <command> ...``; JSON on stdout.

Exit codes: 0 success, 1 inadmissible input (or corner violation),
2 numerical non-convergence, 3 malformed input, 4 inequality violation.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import adm as adm_mod
from .assembly import (
    boundary_data_of_exterior,
    exterior_from_json,
    exterior_metric_spec,
    glue,
    make_generated_exterior,
    make_schwarzschild_exterior,
    mollify_corner,
    random_mass_function,
)
from .boundary import (
    AxisymS2Data,
    Verdict,
    boundary_data_from_json,
    latitude_grid,
    schwarzschild_sphere_data,
)
from .bounds import (
    bound_both,
    bound_for_mode,
    bound_multi,
    end_to_end_check,
    hawking_check,
    penrose_bound_minimal,
)
from .collar import (
    build_collar,
    curvature_bracket,
    mean_curvature_slice,
    minimal_end_area_routes,
    verify_proposition,
)
from .errors import CollarForgeError, InequalityViolation, MalformedInputError
from .profile import proper_length, solve_profile


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path} is not valid JSON: {exc}") from None


def _clean(obj):
    """Make reports JSON-safe: numpy scalars to floats, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, Verdict):
        return obj.value
    return obj


def _emit(doc, stream=None):
    stream = sys.stdout if stream is None else stream
    json.dump(_clean(doc), stream, indent=2, sort_keys=False)
    stream.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _parse_grid(text):
    try:
        s, x = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise MalformedInputError(f"grid must look like 256x128, got {text!r}") from None
    if s < 2 or x < 1:
        raise MalformedInputError("grid sizes must be positive (at least 2 in s)")
    return s, x


def _resample(data, samples):
    """Axisymmetric data moved to a cell-centered grid of ``samples`` latitudes."""
    if not isinstance(data, AxisymS2Data) or samples == data.size:
        return data
    theta = latitude_grid(samples, "cell")
    w = data.interpolant(data.conformal_factor)(theta)
    return AxisymS2Data(theta, data.interpolant(data.H)(theta), conformal_factor=w, area=data.area)


# ---------------------------------------------------------------------------
# commands


def cmd_bound(args):
    data = boundary_data_from_json(_load_json(args.boundary))
    if args.mode == "both":
        return bound_both(data), 0
    return bound_for_mode(data, args.mode, with_profile=args.profile).as_dict(), 0


def cmd_collar(args):
    data = boundary_data_from_json(_load_json(args.boundary))
    s_samples, x_samples = _parse_grid(args.grid)
    data = _resample(data, x_samples)
    collar = build_collar(data, args.mode)
    doc = {
        "schema": "collar/v1",
        "mode": collar.mode,
        "n": collar.n,
        "theta": collar.theta,
        "m": collar.m,
        "r_o": collar.r_o,
        "s_o": collar.s_o,
        "degenerate": collar.degenerate,
        "minimal_end_area": minimal_end_area_routes(collar),
    }
    code = 0
    if collar.degenerate:
        doc["note"] = "H vanishes identically: zero-length collar, nothing to verify"
        return doc, code
    if args.verify:
        report = verify_proposition(collar, s_samples=s_samples)
        doc["verification"] = report.as_dict()
        code = 0 if report.passed else InequalityViolation.exit_code
    if args.out:
        s_grid = np.linspace(0.0, collar.s_o, s_samples)
        bracket = curvature_bracket(collar)
        v = collar.reversed.v_at(s_grid)
        coords = data.theta if isinstance(data, AxisymS2Data) else np.zeros(data.size)
        rows = []
        for s, vs in zip(s_grid, v):
            h_s = mean_curvature_slice(collar, s).values
            r = collar.r_o**2 / vs**2 * bracket
            for i in range(data.size):
                rows.append([repr(float(s)), i, repr(float(coords[i])), repr(float(vs)),
                             repr(float(collar.A.values[i])), repr(float(h_s[i])), repr(float(r[i]))])
        _write_csv(args.out, ["s", "sample", "theta", "v", "A", "H_s", "R_gamma"], rows)
        doc["csv"] = args.out
    return doc, code


def _exterior_side(doc):
    if isinstance(doc, dict) and "backend" in doc:
        return boundary_data_from_json(doc)
    return exterior_from_json(doc)


def cmd_glue(args):
    data = boundary_data_from_json(_load_json(args.boundary))
    outside = _exterior_side(_load_json(args.exterior))
    collar = build_collar(data, args.mode)
    corner = glue(collar, outside, strict=False)
    return corner.as_dict(), 0 if corner.corner_ok else 1


def cmd_mollify(args):
    doc = _load_json(args.exterior)
    ext = exterior_from_json(doc)
    collar_mass = args.collar_mass if args.collar_mass is not None else doc.get("collar_mass")
    if collar_mass is None:
        data = boundary_data_of_exterior(ext)
    else:
        data = schwarzschild_sphere_data(ext.n, float(collar_mass), ext.r_o)
    corner = glue(build_collar(data, "laplacian"), ext, strict=False)
    smooth = mollify_corner(corner, args.delta, allow_violation=True)
    report = smooth.report()
    report["corner"] = corner.as_dict()
    if args.out:
        rows = [[repr(float(a)), repr(float(b)), repr(float(c)), repr(float(d)), repr(float(e))]
                for a, b, c, d, e in zip(smooth.rho, smooth.f, smooth.df, smooth.f_corner, smooth.quasilocal)]
        _write_csv(args.out, ["rho", "f", "df", "f_unsmoothed", "quasilocal_mass"], rows)
        report["csv"] = args.out
    return report, 0 if corner.corner_ok else 1


def cmd_hawking(args):
    data = boundary_data_from_json(_load_json(args.boundary))
    report = hawking_check(data)
    return report.as_dict(), 0 if report.chain_ok else InequalityViolation.exit_code


def metric_spec_from_json(doc):
    """Metric spec: {kind: flat | isotropic_schwarzschild | exterior, n, m, ...}."""
    if not isinstance(doc, dict):
        raise MalformedInputError("metric spec must be a JSON object")
    kind = doc.get("kind")
    try:
        if kind == "flat":
            return adm_mod.flat_metric_spec(doc["n"])
        if kind == "isotropic_schwarzschild":
            return adm_mod.isotropic_schwarzschild_spec(doc["n"], float(doc["m"]))
        if kind == "exterior":
            return exterior_metric_spec(exterior_from_json(doc["exterior"]))
    except KeyError as exc:
        raise MalformedInputError(f"metric spec missing field {exc.args[0]!r}") from None
    raise MalformedInputError(f"unknown metric kind {kind!r}")


def cmd_adm(args):
    spec = metric_spec_from_json(_load_json(args.spec))
    try:
        radii = [float(r) for r in args.radii.split(",")]
    except ValueError:
        raise MalformedInputError(f"cannot parse radii {args.radii!r}") from None
    result = adm_mod.adm_mass(spec, radii)
    doc = result.as_dict()
    doc["schema"] = "adm/v1"
    doc["metric"] = spec.name
    return doc, 0


def cmd_profile(args):
    prof = solve_profile(args.m, args.r_o, args.n, samples=args.samples)
    doc = {
        "schema": "profile/v1",
        "n": prof.n, "m": prof.m, "r_m": prof.r_m, "r_o": prof.r_o, "s_o": prof.s_o,
        "s_o_quadrature": proper_length(prof.m, prof.r_o, prof.n),
        "first_integral_residual": prof.first_integral_residual,
        "first_order_residual": prof.first_order_residual,
        "samples": len(prof.s),
    }
    if args.out:
        _write_csv(args.out, ["s", "u", "du"], [[repr(float(v)) for v in row] for row in prof.as_rows()])
        doc["csv"] = args.out
    return doc, 0


# ---------------------------------------------------------------------------
# selftest


def run_selftest(seed=0, exteriors=10):
    """Fast equality-case and property checks; returns (checks, all_passed)."""
    checks = []

    def record(name, passed, **info):
        checks.append({"name": name, "passed": bool(passed), **info})

    value = proper_length(0.5, 2.0, 3)
    record("proper_length n=3 closed form", abs(value - (math.sqrt(2) + math.log(1 + math.sqrt(2)))) <= 1e-8,
           value=value)
    value = proper_length(0.5, 2.0, 4)
    record("proper_length n=4 closed form", abs(value - math.sqrt(3)) <= 1e-8, value=value)
    record("minimal-boundary bound", abs(penrose_bound_minimal(16 * math.pi, 3) - 1.0) <= 1e-12)
    for n in range(3, 8):
        for m0 in (0.1, 0.4):
            r_o = 2.0 * (2.0 * m0) ** (1.0 / (n - 2))
            report = end_to_end_check(make_schwarzschild_exterior(m0, r_o, n))
            record(f"Schwarzschild equality n={n} m={m0}", abs(report.slack) <= 1e-6, slack=report.slack)
    data = schwarzschild_sphere_data(3, 0.5, 2.0)
    report = verify_proposition(build_collar(data))
    record("collar properties (Schwarzschild)", report.passed, min_R_gamma=report.min_R_gamma)
    hawk = hawking_check(data)
    record("Hawking chain equality", abs(hawk.willmore_term - 0.5) <= 1e-8 and abs(hawk.hawking_mass - 0.5) <= 1e-8)
    multi = bound_multi([data, data])
    record("two-component bound", abs(multi.lower_bound - 0.5 * math.sqrt(2)) <= 1e-12, value=multi.lower_bound)
    corner = glue(build_collar(data), make_schwarzschild_exterior(0.8, 2.0, 3))
    smooth = [mollify_corner(corner, d) for d in (0.2, 0.1, 0.05)]
    record("mollification monotone", all(s.monotone for s in smooth))
    record("mollification end mass", all(abs(s.end_mass - s.end_mass_corner) <= 1e-8 for s in smooth))
    rng = np.random.default_rng(seed)
    slacks = []
    for k in range(exteriors):
        n = int(rng.integers(3, 8))
        r_o = float(rng.uniform(1.0, 3.0))
        ext = make_generated_exterior(random_mass_function(rng, n, r_o, constant=(k % 5 == 0)), r_o, n)
        slacks.append(end_to_end_check(ext).slack)
    record("random exteriors satisfy the bound", min(slacks) >= -1e-6, min_slack=min(slacks), seed=seed)
    return checks, all(c["passed"] for c in checks)


def cmd_selftest(args):
    checks, ok = run_selftest(args.seed, args.exteriors)
    return {"schema": "selftest/v1", "seed": args.seed, "passed": ok, "checks": checks}, 0 if ok else 4


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to the malformed-input exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(MalformedInputError.exit_code, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="collarforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bound", help="mass lower bound from boundary data")
    p.add_argument("boundary")
    p.add_argument("--mode", choices=("cmc", "laplacian", "both"), default="both")
    p.add_argument("--profile", action="store_true", help="cross-check the area through the collar profile")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("collar", help="build (and verify) the collar extension")
    p.add_argument("boundary")
    p.add_argument("--mode", choices=("cmc", "laplacian"), default="laplacian")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--grid", default="256x128", help="s x boundary samples, e.g. 256x128")
    p.add_argument("--out", help="CSV of the sampled collar")
    p.set_defaults(func=cmd_collar)

    p = sub.add_parser("glue", help="glue a collar to an exterior and check the corner")
    p.add_argument("boundary")
    p.add_argument("exterior")
    p.add_argument("--mode", choices=("cmc", "laplacian"), default="laplacian")
    p.set_defaults(func=cmd_glue)

    p = sub.add_parser("mollify", help="smooth the corner of a glued rotationally symmetric manifold")
    p.add_argument("exterior")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--collar-mass", type=float, help="mass of a Schwarzschild collar to glue inside")
    p.add_argument("--out", help="CSV of the smoothed profile")
    p.set_defaults(func=cmd_mollify)

    p = sub.add_parser("hawking", help="Hawking mass comparison for n = 3")
    p.add_argument("boundary")
    p.set_defaults(func=cmd_hawking)

    p = sub.add_parser("adm", help="ADM mass of a metric spec by flux integrals")
    p.add_argument("spec")
    p.add_argument("--radii", required=True, help="comma separated, increasing")
    p.set_defaults(func=cmd_adm)

    p = sub.add_parser("profile", help="Schwarzschild profile u_m on [0, s_o]")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--r-o", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=2048)
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("selftest", help="quick equality-case and property checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exteriors", type=int, default=10)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc, code = args.func(args)
    except CollarForgeError as exc:
        info = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        for attr in ("admissibility", "diagnostics", "report"):
            extra = getattr(exc, attr, None)
            if extra:
                info[attr] = extra.as_dict() if hasattr(extra, "as_dict") else extra
        _emit(info)
        print(f"collarforge: {exc}", file=sys.stderr)
        return exc.exit_code
    _emit(doc)
    return code


if __name__ == "__main__":
    sys.exit(main())
