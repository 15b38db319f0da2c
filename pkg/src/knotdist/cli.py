"""
Command line interface
======================

``knotdist gen | measure | bounds | slices | sweep | minimize``

Tables are CSV with a leading ``# schema: knotdist/<command>/<version>``
comment row. Whenever ``--out`` names a file, a sidecar
``<out>.manifest.json`` records the command, every parameter, the package
version and the SHA-256 of each input and output file, so that re-running
the manifest reproduces the outputs byte for byte.

Exit codes: 0 success, 1 usage or parse error, 2 invariant or floor
violation (including self-intersecting input), 3 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import re
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np
from numba.core.errors import NumbaWarning

from . import __version__
from .anneal import AnnealConfig, anneal
from .bounds import (bezout_min, check_bounds, dominant_floor, obstruction_standard_torus,
                     parse_descriptor, sharpness_ratio)
from .curve import read_curve, regular_polygon, write_curve
from .distortion import DistortionBracket, _threads, distortion_certified
from .errors import (BoundViolationError, DomainError, KnotDistError, LinkError, ResolutionError,
                     SelfIntersectionError, TubeRadiusError)
from .knots import CableParams, TorusParams, cable, optimize_aspect, torus_knot
from .slices import BoxGauge, double_bubble_report, gauge_value

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_NONCONVERGED = 0, 1, 2, 3
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- output helpers ---------------------------------------------------------


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(args, inputs, outputs, seeds=()):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    doc = {
        "command": args.command if args.command != "gen" else f"gen {args.kind}",
        "parameters": params,
        "seeds": list(seeds),
        "version": __version__,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
    }
    for out in outputs:
        Path(f"{out}.manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")


def _table(command, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: knotdist/{command}/{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def _cell(x):
    if isinstance(x, float):
        return format(x, ".17g")
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return ""
    return x


def _emit(args, text, inputs=(), seeds=()):
    if args.out:
        Path(args.out).write_text(text)
        _write_manifest(args, inputs, [args.out], seeds)
    else:
        sys.stdout.write(text)


def _floats(text, count, name):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"{name} must be {count} comma-separated numbers") from None
    if len(vals) != count:
        raise UsageError(f"{name} must be {count} comma-separated numbers, got {len(vals)}")
    return vals


def _fraction(text) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}") from None


def _bracket_fields(b: DistortionBracket):
    return [b.lo, b.hi, b.width, b.witness[0], b.witness[1], b.refinement_depth, b.converged, b.cells]


_BRACKET_HEADER = ["lo", "hi", "width", "witness_s", "witness_t", "refinement_depth", "converged", "cells"]


# -- commands -----------------------------------------------------------------


def cmd_gen(args):
    if args.kind == "torus":
        curve = torus_knot(TorusParams(args.R, args.r, args.p, args.q, args.n))
        inputs = []
    elif args.kind == "circle":
        curve = regular_polygon(args.n, args.radius)
        inputs = []
    else:
        base = read_curve(args.base)
        n = args.n if args.n is not None else 8 * args.p * base.n
        curve = cable(CableParams(base, args.p, args.q, args.rho, n))
        inputs = [args.base]
    write_curve(curve, args.out)
    _write_manifest(args, inputs, [args.out])
    return EXIT_OK


def cmd_measure(args):
    curve = read_curve(args.curve)
    b = distortion_certified(curve, args.rel_tol, jobs=args.jobs)
    text = _table("measure", ["file", "n", "length", *_BRACKET_HEADER, "rel_tol"],
                  [[args.curve, curve.n, curve.length, *_bracket_fields(b), args.rel_tol]])
    _emit(args, text, [args.curve])
    return EXIT_OK if b.converged else EXIT_NONCONVERGED


def cmd_bounds(args):
    descriptor = parse_descriptor(args.descriptor)
    curve = read_curve(args.curve)
    if args.assume_bracket is not None:
        lo, hi = _floats(args.assume_bracket, 2, "--assume-bracket")
        b = DistortionBracket(lo=lo, hi=hi, witness=(0.0, 0.0), refinement_depth=0, rel_tol=args.rel_tol)
    else:
        b = distortion_certified(curve, args.rel_tol, jobs=args.jobs)
    report = check_bounds(descriptor, b)
    top = report.max_floor
    margins = ";".join(f"{name}={m:.17g}" for name, m in report.margins())
    text = _table("bounds", ["file", "descriptor", "lo", "hi", "max_floor_name", "max_floor", "margins", "verdict"],
                  [[args.curve, str(descriptor), b.lo, b.hi, top.name, top.value, margins,
                    "pass" if report.passed else "fail"]])
    _emit(args, text, [args.curve])
    if not report.passed:
        print(f"floor violation: certified hi {b.hi} below {top.name} = {top.value}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK if b.converged else EXIT_NONCONVERGED


def cmd_slices(args):
    curve = read_curve(args.curve)
    rot = None if args.rotation is None else np.array(_floats(args.rotation, 9, "--rotation")).reshape(3, 3)
    if args.center is None:
        center = curve.centroid()
    else:
        center = np.array(_floats(args.center, 3, "--center"))
    g = BoxGauge(center, rot)
    scale = args.scale if args.scale is not None else 0.9 / float(np.max(gauge_value(g, curve.vertices)))
    posed = curve.scaled(scale, center)
    if args.delta_hi is not None:
        delta_hi, converged = args.delta_hi, True
    else:
        b = distortion_certified(posed, args.rel_tol, jobs=args.jobs)
        delta_hi, converged = b.hi, b.converged
    rep = double_bubble_report(posed, g, args.epsilon, delta_hi, args.obstruction)
    text = _table(
        "slices",
        ["file", "epsilon", "scale", "delta_hi", "r1", "s1", "count_shell", "count_disk", "score",
         "bound_shell", "bound_disk", "bound_score", "contraction_radius", "obstruction", "contraction_applies",
         "jittered_levels"],
        [[args.curve, rep.epsilon, float(scale), delta_hi, rep.r1, rep.s1, rep.count_shell, rep.count_disk,
          rep.score, *rep.certified_bounds, rep.contraction_radius, rep.obstruction, rep.contraction_applies, 0]],
    )
    _emit(args, text, [args.curve])
    return EXIT_OK if converged else EXIT_NONCONVERGED


_AFFINE = re.compile(r"^\s*(?:(\d+)\s*\*?\s*)?p\s*(?:([+-])\s*(\d+))?\s*$")


def _affine(expr):
    expr = expr.strip()
    if re.fullmatch(r"\d+", expr):
        k = int(expr)
        return lambda p: k
    m = _AFFINE.match(expr)
    if not m:
        raise UsageError(f"cannot parse family term {expr!r}; use forms like p, 2p+1, 3*p-1 or an integer")
    k = int(m.group(1) or 1)
    b = int(m.group(3) or 0) * (-1 if m.group(2) == "-" else 1)
    return lambda p: k * p + b


def parse_family(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"--family must be two terms 'P,Q', got {text!r}")
    return _affine(parts[0]), _affine(parts[1])


def parse_range(text):
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if not m:
        raise UsageError(f"--p-range must look like 2..6, got {text!r}")
    a, b = int(m.group(1)), int(m.group(2))
    if a > b:
        raise UsageError("--p-range is empty")
    return range(a, b + 1)


SWEEP_HEADER = ["p", "q", "bezout_min", "obstruction", "max_floor_name", "max_floor", "R_over_r", "n",
                *_BRACKET_HEADER, "sharpness_ratio", "verdict"]


def sweep_rows(family, p_range, aspect_search, rel_tol, n_per_q=60, ratio=2.0):
    fp, fq = family
    rows = []
    for t in p_range:
        p, q = fp(t), fq(t)
        if p < 1 or q < 1 or math.gcd(p, q) != 1:
            raise UsageError(f"family gives ({p}, {q}), not a coprime pair of positive integers")
        n = n_per_q * max(p, q)
        if aspect_search:
            x, _ = optimize_aspect(p, q, n, rel_tol=rel_tol)
        else:
            x = ratio
        b = distortion_certified(torus_knot(TorusParams(x, 1.0, p, q, n)), rel_tol)
        rep = check_bounds(f"torus({p},{q})", b)
        top = dominant_floor(rep.descriptor)
        rows.append([p, q, bezout_min(p, q), obstruction_standard_torus(p, q), top.name, top.value, x, n,
                     *_bracket_fields(b), sharpness_ratio(p, q, b.hi), "pass" if rep.passed else "fail"])
    return rows


def cmd_sweep(args):
    rows = sweep_rows(parse_family(args.family), parse_range(args.p_range), args.aspect_search,
                      args.rel_tol, args.n_per_q, args.ratio)
    _emit(args, _table("sweep", SWEEP_HEADER, rows))
    if any(r[-1] == "fail" for r in rows):
        return EXIT_VIOLATION
    return EXIT_OK if all(r[SWEEP_HEADER.index("converged")] for r in rows) else EXIT_NONCONVERGED


def cmd_minimize(args):
    curve = read_curve(args.curve)
    cfg = AnnealConfig(iterations=args.iterations, initial_amplitude=args.amplitude, cooling=args.cooling,
                       seed=args.seed, certify_every=args.certify_every, rel_tol=args.rel_tol,
                       initial_temperature=args.temperature)
    rep = anneal(curve, cfg)
    write_curve(rep.curve, args.out)
    outputs = [args.out]
    hist = _table("minimize", ["step", "best_hi"],
                  [[min(k * cfg.certify_every, cfg.iterations), h] for k, h in enumerate(rep.history)])
    if args.history:
        Path(args.history).write_text(hist)
        outputs.append(args.history)
    _write_manifest(args, [args.curve], outputs, [args.seed])
    summary = _table("minimize-summary", ["initial_hi", "final_lo", "final_hi", "accepted", "rejected"],
                     [[rep.initial.hi, rep.final.lo, rep.final.hi, rep.accepted, rep.rejected]])
    sys.stdout.write(summary)
    if args.descriptor:
        report = check_bounds(args.descriptor, rep.final)
        if not report.passed:
            print(f"floor violation after annealing: {rep.final.hi} < {report.max_floor.value}", file=sys.stderr)
            return EXIT_VIOLATION
    return EXIT_OK if rep.final.converged else EXIT_NONCONVERGED


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="knotdist", description="Certified distortion of polygonal knots.")
    parser.add_argument("--version", action="version", version=f"knotdist {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_help="output CSV file (default: stdout)"):
        p.add_argument("--jobs", type=int, default=None, help="worker threads (results do not depend on it)")
        p.add_argument("--rel-tol", type=float, default=1e-6, help="relative bracket width (default 1e-6)")
        p.add_argument("--out", default=None, help=out_help)

    gen = sub.add_parser("gen", help="write a generated curve file")
    gsub = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    t = gsub.add_parser("torus", help="torus knot T(p,q) on a torus of revolution")
    t.add_argument("--p", type=int, required=True, help="longitudinal winding")
    t.add_argument("--q", type=int, required=True, help="meridional winding")
    t.add_argument("--R", type=float, default=2.0, help="major radius (default 2)")
    t.add_argument("--r", type=float, default=0.5, help="minor radius (default 0.5)")
    t.add_argument("--n", type=int, default=600, help="vertex count (default 600)")
    c = gsub.add_parser("cable", help="(p,q)-cable of a base curve in the Seifert framing")
    c.add_argument("--base", required=True, help="base curve file")
    c.add_argument("--p", type=int, required=True, help="longitudinal coefficient")
    c.add_argument("--q", type=int, required=True, help="meridional coefficient")
    c.add_argument("--rho", type=float, required=True, help="tube radius")
    c.add_argument("--n", type=int, default=None, help="vertex count (default 8 p n_base)")
    ci = gsub.add_parser("circle", help="regular polygon")
    ci.add_argument("--n", type=int, default=1024, help="vertex count (default 1024)")
    ci.add_argument("--radius", type=float, default=1.0, help="circumradius (default 1)")
    for p in (t, c, ci):
        p.add_argument("--out", required=True, help="curve file to write")
        p.add_argument("--jobs", type=int, default=None, help="worker threads")
        p.set_defaults(func=cmd_gen)

    m = sub.add_parser("measure", help="certified distortion bracket of a curve file")
    m.add_argument("curve")
    common(m)
    m.set_defaults(func=cmd_measure)

    b = sub.add_parser("bounds", help="check a measured bracket against every applicable floor")
    b.add_argument("curve")
    b.add_argument("--descriptor", required=True, help="torus(p,q) | cable(p) | nontrivial | unknown")
    b.add_argument("--assume-bracket", default=None, help=argparse.SUPPRESS)
    common(b)
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("slices", help="good radius, good plane and double-bubble score")
    s.add_argument("curve")
    s.add_argument("--epsilon", type=_fraction, default=1.0 / 7.0, help="shell width, e.g. 1/7 (default)")
    s.add_argument("--center", default=None, help="gauge centre x,y,z (default: curve centroid)")
    s.add_argument("--rotation", default=None, help="gauge rotation, 9 row-major numbers (default identity)")
    s.add_argument("--scale", type=float, default=None,
                   help="scale about the centre applied to the curve (default: largest gauge value 0.9)")
    s.add_argument("--obstruction", type=int, default=None, help="intersection obstruction I to compare the score with")
    s.add_argument("--delta-hi", type=float, default=None,
                   help="certified distortion upper bound of the scaled curve (default: measured)")
    common(s)
    s.set_defaults(func=cmd_slices)

    w = sub.add_parser("sweep", help="torus-knot family table with sharpness ratios")
    w.add_argument("--family", default="p,p+1", help="pair of affine terms in p (default 'p,p+1')")
    w.add_argument("--p-range", default="2..6", help="inclusive range, e.g. 2..6")
    w.add_argument("--aspect-search", action="store_true", help="optimise R/r for every knot")
    w.add_argument("--ratio", type=float, default=2.0, help="R/r without --aspect-search (default 2)")
    w.add_argument("--n-per-q", type=int, default=60, help="vertices per unit of max(p,q) (default 60)")
    common(w)
    w.set_defaults(func=cmd_sweep)

    z = sub.add_parser("minimize", help="anneal a curve within its knot type")
    z.add_argument("curve")
    z.add_argument("--out", required=True, help="curve file for the best curve")
    z.add_argument("--history", default=None, help="CSV file for the certified best-so-far history")
    z.add_argument("--iterations", type=int, default=10_000)
    z.add_argument("--amplitude", type=float, default=0.25, help="step as a fraction of the mean edge length")
    z.add_argument("--cooling", type=float, default=0.999)
    z.add_argument("--temperature", type=float, default=1e-2)
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--certify-every", type=int, default=1000)
    z.add_argument("--rel-tol", type=float, default=1e-6)
    z.add_argument("--descriptor", default=None, help="knot descriptor whose floors the result must respect")
    z.add_argument("--jobs", type=int, default=None, help="worker threads for certification")
    z.set_defaults(func=cmd_minimize)
    return parser


def main(argv=None) -> int:
    # an old system TBB only makes numba fall back to OpenMP; not worth a warning on every run
    warnings.filterwarnings("ignore", message="The TBB threading layer", category=NumbaWarning)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _threads(args.jobs):
            return args.func(args)
    except UsageError as exc:
        print(f"knotdist: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SelfIntersectionError, BoundViolationError) as exc:
        print(f"knotdist: {type(exc).__name__}: {exc}", file=sys.stderr)
        if isinstance(exc, SelfIntersectionError):
            print("knotdist: the curve is not embedded, so its distortion is infinite", file=sys.stderr)
        return EXIT_VIOLATION
    except (LinkError, DomainError, ResolutionError, TubeRadiusError, ValueError, OSError) as exc:
        print(f"knotdist: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KnotDistError as exc:
        print(f"knotdist: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
