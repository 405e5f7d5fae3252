"""Acceptance criteria, one function per criterion.

Run under pytest (one PASS/FAIL line per criterion is printed even with
output capture on) or directly with ``python tests/test_acceptance.py``.
"""
import io
import json
import math
import sys
import time

import numpy as np
import pytest

from trigon.catalog import builtin_catalog, chain_values, lookup
from trigon.cli import main as cli_main
from trigon.expr import ParseError, expand_cyc, parse, parse_expr, parse_inequality, serialize
from trigon.sampler import TRIANGLE_KINDS, SampleConfig, triangle_array
from trigon.sharpness import compare_dominance, find_violation, gap, minimize_gap, scan
from trigon.triangle import IDENTITY_IDS, SideTriple, derive, derive_arrays, identity_residuals_arrays

N = 100_000
SCHUR_T = (1.0, 2.0, -1.0, -0.5, 0.5, 1.5, 3.0)
REVERSED = "a^2 + b^2 + c^2 >= 18*R*r + cyc((a - b)^2)"


def identity_suite():
    start = time.perf_counter()
    sides = triangle_array(SampleConfig(count=N, seed=42, min_degeneracy=1e-4))
    res = identity_residuals_arrays(sides[:, 0], sides[:, 1], sides[:, 2])
    worst = max(IDENTITY_IDS, key=lambda k: res[k].max())
    elapsed = time.perf_counter() - start
    ok = all(res[k].max() <= 1e-9 for k in IDENTITY_IDS) and elapsed <= 30
    return ok, f"max residual {res[worst].max():.2e} ({worst}), {elapsed:.1f}s"


def catalog_soundness():
    bad = []
    scans = 0
    for entry in builtin_catalog():
        if entry.domain == "triangle":
            for kind in TRIANGLE_KINDS:
                rep = scan(entry, SampleConfig(kind=kind, count=N, seed=1), workers=4)
                scans += 1
                if not rep.holds:
                    bad.append(f"{entry.id}/{kind}")
        else:
            ts = SCHUR_T if entry.parameterized else (None,)
            for t in ts:
                rep = scan(entry, SampleConfig(kind="log_uniform", count=N, seed=1), t=t, workers=4)
                scans += 1
                if not rep.holds:
                    bad.append(f"{entry.id}/t={t}")
    return not bad, f"{scans} scans of {N} samples, violations in {bad or 'none'}"


def tightness():
    worst_gap, worst_dist, failures = 0.0, 0.0, []
    for entry in builtin_catalog():
        if not entry.tight or entry.domain != "triangle":
            continue
        res = minimize_gap(entry)
        dist = float(np.abs(np.array(tuple(res.argmin)) - 2 / 3).max())
        worst_gap = max(worst_gap, abs(res.min_normalized_gap))
        worst_dist = max(worst_dist, dist)
        if abs(res.min_normalized_gap) > 1e-8 or dist > 1e-4:
            failures.append(entry.id)
    return not failures, f"max |gap| {worst_gap:.1e}, max argmin offset {worst_dist:.1e}, failures {failures or 'none'}"


def point_checks():
    q = derive(SideTriple(3, 4, 5))
    key = gap(lookup("key_scalar"), SideTriple(3, 4, 5)).lhs_val
    fh = gap(lookup("finsler_hadwiger"), SideTriple(3, 4, 5)).abs_gap
    r2 = gap(lookup("refinement_2"), SideTriple(3, 4, 5)).rhs_val
    checks = [
        math.isclose(q.r, 1, abs_tol=1e-12),
        math.isclose(q.R, 2.5, abs_tol=1e-12),
        abs(key - 1655 / 396) <= 1e-6,
        abs(fh - (50 - 24 * math.sqrt(3) - 6)) <= 1e-4 and abs(fh - 2.4308) <= 1e-4,
        abs(r2 - (24 * math.sqrt(35 / 11) + 6)) <= 1e-4 and abs(r2 - 48.8103) <= 1e-4,
    ]
    return all(checks), f"r={q.r:g} R={q.R:g} key={key:.6f} fh_gap={fh:.4f} ref2_rhs={r2:.4f}"


def dominance():
    cfg = SampleConfig(count=N, seed=3)
    fh = lookup("finsler_hadwiger")
    r2 = compare_dominance(lookup("refinement_2"), fh, cfg)
    r1 = compare_dominance(lookup("refinement_1"), fh, cfg)
    both = compare_dominance(lookup("refinement_1"), lookup("refinement_2"), cfg)
    emitted = {
        "first_dominates": both.witness_first is not None,
        "second_dominates": both.witness_second is not None,
        "incomparable": both.witness_first is not None and both.witness_second is not None,
        "equivalent": True,
    }[both.relation]
    ok = (
        r2.relation == "first_dominates" and r2.witness_second is None
        and r1.relation == "first_dominates" and r1.witness_second is None
        and emitted
    )
    return ok, f"ref2/fh {r2.relation}, ref1/fh {r1.relation}, ref1/ref2 {both.relation}"


def reversed_direction():
    cfg = SampleConfig(count=N, seed=0)
    w = find_violation(parse(REVERSED), cfg)
    # index among non-equilateral samples; the stream contains none exactly equilateral
    sides = triangle_array(cfg, 0, 100)
    non_eq = int(np.sum(np.abs(sides - 2 / 3).max(axis=1) > 0))
    rep = scan(lookup("reversed_18Rr"), cfg, workers=4)
    ok = w is not None and w.index < min(100, non_eq) and rep.holds
    index = None if w is None else w.index
    return ok, f"witness index {index}, stored direction violations {len(rep.violations)}"


def schur_equivalence():
    sides = triangle_array(SampleConfig(count=10_000, seed=5))
    g_sides = np.array([gap(lookup("schur_t2_sides"), SideTriple(*p)).normalized_gap for p in sides])
    g_trip = np.array([gap(lookup("schur_t2"), tuple(p)).normalized_gap for p in sides])
    rel = np.abs(g_sides - g_trip) / np.maximum(np.maximum(np.abs(g_sides), np.abs(g_trip)), 1e-300)
    suite = triangle_array(SampleConfig(count=N, seed=42, min_degeneracy=1e-4))
    i16 = identity_residuals_arrays(suite[:, 0], suite[:, 1], suite[:, 2])["I16"].max()
    ok = rel.max() <= 1e-10 and i16 <= 1e-9
    return ok, f"max relative gap difference {rel.max():.1e}, I16 residual {i16:.1e}"


def chain_monotone():
    sides = triangle_array(SampleConfig(count=N, seed=8))
    vals = chain_values(derive_arrays(sides[:, 0], sides[:, 1], sides[:, 2]))
    links = [hi - lo for hi, lo in zip(vals, vals[1:])]
    # rounding floor: links vanish together at the equilateral point
    ok = all(np.all(d >= -1e-12) for d in links)
    worst = min(float(d.min()) for d in links)
    return ok, f"smallest link {worst:.2e} over {N} samples"


def _cli(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli_main(argv, out, err)
    return code, out.getvalue()


def determinism():
    runs = [
        ["scan", "refinement_2", "--samples", "20000", "--seed", "11", "--format", "json"],
        ["scan", "schur_general", "--t", "1.5", "--samples", "20000", "--seed", "11", "--format", "json"],
        ["minimize", "app7", "--format", "json"],
    ]
    same = []
    for argv in runs:
        first, second = _cli(argv), _cli(argv)
        json.loads(first[1])
        same.append(first == second)
    workers = _cli(runs[0] + ["--workers", "4"])[1]
    same.append(json.loads(workers)["result"] == json.loads(_cli(runs[0])[1])["result"])
    return all(same), f"{sum(same)}/{len(same)} repeated runs identical"


def _fuzz_expression(rng, depth=0):
    syms = ["a", "b", "c", "s", "S", "R", "r", "r_a", "h_b", "A", "C"]
    if depth > 3 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return str(syms[rng.integers(len(syms))])
        return str(rng.choice(["2", "0.5", "17", "1e-3", "3.25"]))
    kind = rng.integers(5)
    if kind == 0:
        op = str(rng.choice(["+", "-", "*", "/"]))
        return f"{_fuzz_expression(rng, depth + 1)} {op} {_fuzz_expression(rng, depth + 1)}"
    if kind == 1:
        return f"({_fuzz_expression(rng, depth + 1)})^{rng.choice(['2', '3', '0.5'])}"
    if kind == 2:
        fn = str(rng.choice(["sqrt", "cbrt", "tan", "abs", "cos"]))
        return f"{fn}({_fuzz_expression(rng, depth + 1)})"
    if kind == 3:
        return f"-({_fuzz_expression(rng, depth + 1)})"
    return f"({_fuzz_expression(rng, depth + 1)})*({_fuzz_expression(rng, depth + 1)})"


def parser_round_trip():
    ok = True
    for e in builtin_catalog():
        d = e.defn
        again = parse_inequality(serialize(d), d.domain, d.name, d.inhomogeneous)
        ok &= again == d and serialize(again) == serialize(d)
        for side in (d.lhs, d.rhs):
            ok &= parse(serialize(expand_cyc(side)), d.domain) == expand_cyc(side)
    rng = np.random.default_rng(2024)
    fuzzed = [_fuzz_expression(rng) for _ in range(100)]
    for text in fuzzed:
        node = parse_expr(text)
        once = serialize(node)
        ok &= parse_expr(once) == node and serialize(parse_expr(once)) == once
    malformed = ["a + * b", "(a + b", "a >=", "sqrt(", "a $ b", "cyc(cyc(a))", "a >= b <= c", "", "1.2.3", "a^b"]
    positioned = 0
    for text in malformed:
        try:
            parse(text)
        except ParseError as exc:
            positioned += exc.position is not None
        except Exception:  # any other exception is a crash
            ok = False
    ok &= positioned == len(malformed)
    return ok, f"{len(builtin_catalog())} built-ins, {len(fuzzed)} fuzzed, {positioned}/{len(malformed)} positioned errors"


CRITERIA = [
    (1, "identity suite", identity_suite),
    (2, "catalog soundness", catalog_soundness),
    (3, "tightness", tightness),
    (4, "point checks", point_checks),
    (5, "dominance", dominance),
    (6, "reversed direction", reversed_direction),
    (7, "Schur equivalence", schur_equivalence),
    (8, "chain monotonicity", chain_monotone),
    (9, "determinism", determinism),
    (10, "parser", parser_round_trip),
]


def _line(number, name, ok, detail):
    return f"criterion {number:>2} {name:<20} {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("number, name, fn", CRITERIA, ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(number, name, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(number, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for number, name, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(_line(number, name, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
