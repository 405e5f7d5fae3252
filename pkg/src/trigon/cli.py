"""Command-line front end.

Exit codes: 0 success / inequality holds, 1 usage or input error,
2 a mathematical violation was found.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional

import numpy as np

from . import __version__
from .catalog import CatalogError, Registry
from .expr import TRIANGLE, TRIPLE, ExprError, evaluate, parse_expr, parse_inequality
from .sampler import SampleConfig, TRIANGLE_KINDS, TRIPLE_KINDS, KINDS
from .sharpness import (
    SharpnessError,
    compare_dominance,
    find_violation,
    gap,
    minimize_gap,
    scan,
    scan_values,
)
from .triangle import IDENTITY_IDS, SideTriple, TriangleError, derive, identity_residuals_arrays
from .sampler import triangle_array

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2

IDENTITY_TOL = 1e-9


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("TRIGON_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"TRIGON_SEED must be an integer, got {raw!r}") from None


def _triple(text: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected three comma-separated numbers, got {text!r}") from None
    if len(vals) != 3:
        raise UsageError(f"expected three comma-separated numbers, got {text!r}")
    return vals


def _point(args):
    if (args.triangle is None) == (args.triple is None):
        raise UsageError("give exactly one of --triangle or --triple")
    if args.triangle is not None:
        return TRIANGLE, SideTriple(*_triple(args.triangle))
    vals = _triple(args.triple)
    if min(vals) <= 0:
        raise UsageError("--triple components must be positive")
    return TRIPLE, tuple(vals)


def _target(registry: Registry, text: str, domain: str):
    """A catalog entry by id, or an inline inequality."""
    if text in registry:
        return registry.get(text)
    if any(op in text for op in (">=", "<=")):
        return parse_inequality(text, domain, name=text)
    raise CatalogError(f"unknown entry id {text!r}")


def _sides(p) -> list:
    return [float(v) for v in p]


# --- commands ---------------------------------------------------------------

def cmd_check(args, registry):
    domain, point = _point(args)
    target = _target(registry, args.target, domain)
    if target.domain != domain:
        raise UsageError(f"{args.target} is a {target.domain} inequality")
    rep = gap(target, point, t=args.t)
    status = "holds" if rep.holds else "violated"
    result = {
        "point": _sides(point),
        "lhs": rep.lhs_val,
        "rhs": rep.rhs_val,
        "abs_gap": rep.abs_gap,
        "normalized_gap": rep.normalized_gap,
        "degree": rep.degree,
        "holds": rep.holds,
    }
    if args.t is not None:
        result["t"] = args.t
    text = (
        f"{rep.entry_id} at {tuple(point)}: lhs = {rep.lhs_val:.12g}, rhs = {rep.rhs_val:.12g}\n"
        f"abs_gap = {rep.abs_gap:.12g}, normalized_gap = {rep.normalized_gap:.12g} -> {status}"
    )
    return status, [rep.entry_id], result, text


def _config(args, domain) -> SampleConfig:
    kind = args.sampler or ("ravi_uniform" if domain == TRIANGLE else "log_uniform")
    if domain == TRIANGLE and kind not in TRIANGLE_KINDS or domain == TRIPLE and kind not in TRIPLE_KINDS:
        raise UsageError(f"sampler {kind!r} does not match a {domain} inequality")
    return SampleConfig(kind, args.samples, args.seed, args.min_degeneracy)


def cmd_scan(args, registry):
    target = _target(registry, args.target, args.domain)
    cfg = _config(args, target.domain)
    if args.format == "csv":
        points, norm = scan_values(target, cfg, t=args.t)
        names = ("a", "b", "c") if target.domain == TRIANGLE else ("x", "y", "z")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("index",) + names + ("normalized_gap",))
        for i, (p, g) in enumerate(zip(points, norm)):
            w.writerow((i, repr(float(p[0])), repr(float(p[1])), repr(float(p[2])), repr(float(g))))
        status = "violated" if np.any(norm < -1e-9) else "holds"
        return status, [args.target], None, buf.getvalue().rstrip("\n")
    rep = scan(target, cfg, t=args.t, workers=args.workers)
    status = "holds" if rep.holds else "violated"
    result = {
        "sampler": cfg.kind,
        "count": rep.count,
        "min_degeneracy": cfg.min_degeneracy,
        "min_normalized_gap": rep.min_normalized_gap,
        "argmin": list(rep.argmin),
        "argmin_index": rep.argmin_index,
        "violations": len(rep.violations),
        "first_violations": [
            {"index": v.index, "point": list(v.point), "normalized_gap": v.normalized_gap}
            for v in rep.violations[:10]
        ],
    }
    if args.t is not None:
        result["t"] = args.t
    text = (
        f"{rep.entry_id}: {rep.count} {cfg.kind} samples (seed {cfg.seed})\n"
        f"min normalized gap {rep.min_normalized_gap:.6g} at #{rep.argmin_index} {rep.argmin}\n"
        f"violations: {len(rep.violations)} -> {status}"
    )
    return status, [rep.entry_id], result, text


def cmd_minimize(args, registry):
    target = _target(registry, args.target, TRIANGLE)
    res = minimize_gap(target, grid=args.grid, starts=args.starts, t=args.t)
    status = "holds" if res.min_normalized_gap >= -1e-9 else "violated"
    result = {
        "argmin": _sides(res.argmin),
        "min_normalized_gap": res.min_normalized_gap,
        "grid_min": res.grid_min,
        "evaluations": res.evaluations,
        "converged": res.converged,
    }
    text = (
        f"{res.entry_id}: min normalized gap {res.min_normalized_gap:.6g} at {tuple(res.argmin)}\n"
        f"evaluations {res.evaluations}, converged {res.converged}"
    )
    return status, [res.entry_id], result, text


def cmd_compare(args, registry):
    first, second = registry.get(args.first), registry.get(args.second)
    cfg = _config(args, TRIANGLE)
    rep = compare_dominance(first, second, cfg)
    result = {
        "sampler": cfg.kind,
        "count": cfg.count,
        "relation": rep.relation,
        "witness_first": None if rep.witness_first is None else _sides(rep.witness_first),
        "witness_second": None if rep.witness_second is None else _sides(rep.witness_second),
        "points": rep.points,
        "first_exceeds": rep.first_exceeds,
        "second_exceeds": rep.second_exceeds,
        "max_first_margin": rep.max_first_margin,
        "max_second_margin": rep.max_second_margin,
    }
    text = (
        f"{rep.id1} vs {rep.id2}: {rep.relation} over {rep.points} points\n"
        f"first tighter at {rep.first_exceeds} (witness {rep.witness_first}), "
        f"second tighter at {rep.second_exceeds} (witness {rep.witness_second})"
    )
    return "holds", [rep.id1, rep.id2], result, text


def cmd_identities(args, registry):
    cfg = SampleConfig("ravi_uniform", args.samples, args.seed, args.min_degeneracy)
    sides = triangle_array(cfg)
    res = identity_residuals_arrays(sides[:, 0], sides[:, 1], sides[:, 2])
    maxima = {k: float(res[k].max()) for k in IDENTITY_IDS}
    ok = all(v <= IDENTITY_TOL for v in maxima.values())
    status = "holds" if ok else "violated"
    result = {"count": cfg.count, "min_degeneracy": cfg.min_degeneracy, "tolerance": IDENTITY_TOL,
              "max_residual": maxima}
    lines = [f"{k:>4}  max residual {v:.3e}  {'ok' if v <= IDENTITY_TOL else 'FAIL'}" for k, v in maxima.items()]
    lines.append(f"{cfg.count} samples (seed {cfg.seed}) -> {status}")
    return status, list(IDENTITY_IDS), result, "\n".join(lines)


def cmd_catalog(args, registry):
    entries = list(registry)
    if args.action == "export":
        from .catalog import export_definitions

        text = export_definitions(entries)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
            text = f"wrote {len(entries)} entries to {args.output}"
        return "holds", [e.id for e in entries], {"entries": len(entries), "output": args.output}, text.rstrip("\n")
    rows = [
        {"id": e.id, "domain": e.domain, "degree": e.degree, "tight": e.tight,
         "inequality": e.defn.text(), "reference": e.reference, "notes": e.notes}
        for e in entries
    ]
    text = "\n".join(
        f"{r['id']:<18} {r['domain']:<15} deg {'-' if r['degree'] is None else format(r['degree'], 'g'):>3} "
        f"{'tight' if r['tight'] else '     '}  {r['inequality']}"
        for r in rows
    )
    return "holds", [e.id for e in entries], {"entries": rows}, text


def cmd_eval(args, registry):
    domain, point = _point(args)
    node = parse_expr(args.expr, domain)
    bindings = derive(point) if domain == TRIANGLE else point
    value = evaluate(node, bindings, t=args.t)
    return "holds", [], {"expr": args.expr, "point": _sides(point), "value": value}, f"{value:.15g}"


def cmd_find_violation(args, registry):
    target = _target(registry, args.target, args.domain)
    cfg = _config(args, target.domain)
    w = find_violation(target, cfg, t=args.t)
    if w is None:
        return "holds", [args.target], {"witness": None, "count": cfg.count}, f"no violation in {cfg.count} samples"
    result = {
        "count": cfg.count,
        "witness": {"index": w.index, "sample": list(w.sample), "normalized_gap": w.normalized_gap,
                    "shrunk": list(w.shrunk), "shrunk_gap": w.shrunk_gap},
    }
    text = (
        f"violation at sample #{w.index} {w.sample}: normalized gap {w.normalized_gap:.6g}\n"
        f"shrunk toward the centre: {w.shrunk} (gap {w.shrunk_gap:.3g})"
    )
    return "violated", [args.target], result, text


# --- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--defs", action="append", default=[], metavar="PATH",
                        help="definition file loaded before the command runs")
    common.add_argument("--allow-inhomogeneous", action="store_true")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--samples", type=int, default=10000)
    sampling.add_argument("--seed", type=int, default=None, help="defaults to $TRIGON_SEED or 0")
    sampling.add_argument("--sampler", choices=KINDS, default=None)
    sampling.add_argument("--min-degeneracy", type=float, default=1e-6)

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--triangle", metavar="A,B,C")
    point.add_argument("--triple", metavar="X,Y,Z")

    param = argparse.ArgumentParser(add_help=False)
    param.add_argument("--t", type=float, default=None, help="Schur exponent for parameterized entries")

    parser = argparse.ArgumentParser(prog="trigon", description="Triangle inequality verification and sharpness analysis.")
    parser.add_argument("--version", action="version", version=f"trigon {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common, point, param], help="gap of one inequality at one point")
    p.add_argument("target", help="catalog id or inline inequality")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scan", parents=[common, sampling, param], help="gap over a sample stream")
    p.add_argument("target")
    p.add_argument("--domain", choices=(TRIANGLE, TRIPLE), default=TRIANGLE, help="domain of an inline inequality")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("minimize", parents=[common, param], help="global minimum of the normalized gap")
    p.add_argument("target")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--starts", type=int, default=5)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("compare", parents=[common, sampling], help="dominance between two refinements")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("identities", parents=[common], help="residuals of the identity suite")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--min-degeneracy", type=float, default=1e-4)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("catalog", parents=[common], help="list or export the registry")
    p.add_argument("action", choices=("list", "export"))
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("eval", parents=[common, point, param], help="evaluate an expression at one point")
    p.add_argument("expr")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("find-violation", parents=[common, sampling, param], help="search for a counterexample")
    p.add_argument("target")
    p.add_argument("--domain", choices=(TRIANGLE, TRIPLE), default=TRIANGLE)
    p.set_defaults(func=cmd_find_violation)
    return parser


def _emit(args, record, text, out):
    if args.format == "json":
        out.write(json.dumps(record, indent=2) + "\n")
    elif text:
        out.write(text + "\n")


def main(argv: Optional[list] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR

    argv_echo = list(sys.argv[1:] if argv is None else argv)
    record = {"command": args.command, "argv": argv_echo}
    try:
        if hasattr(args, "seed"):
            if args.seed is None:
                args.seed = _default_seed()
            record["seed"] = args.seed
        registry = Registry()
        for path in args.defs:
            registry.load_file(path, allow_inhomogeneous=args.allow_inhomogeneous)
        status, ids, result, text = args.func(args, registry)
    except (UsageError, TriangleError, ExprError, CatalogError, SharpnessError, ValueError, OSError) as exc:
        record.update({"entries": [], "status": "error", "error": str(exc)})
        if args.format == "json":
            _emit(args, record, None, out)
        err.write(f"error: {exc}\n")
        return EXIT_ERROR

    record.update({"entries": ids, "status": status})
    if result is not None:
        record["result"] = result
    _emit(args, record, text, out)
    return EXIT_VIOLATED if status == "violated" else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
