"""Triangles given by side lengths, their derived quantities, and the
classical identities relating them.

Every function accepts plain floats; the ``*_arrays`` variants take numpy
arrays of equal shape so that large samples can be processed at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Dict, List, Tuple

import numpy as np

RESIDUAL_EPS = 1e-300


class TriangleError(ValueError):
    """Raised for side or Ravi triples that do not describe a triangle."""


@dataclass(frozen=True)
class SideTriple:
    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v)):
                raise TriangleError(f"side {name} must be a finite real, got {v!r}")
            if v <= 0:
                raise TriangleError(f"side {name} must be positive, got {v!r}")
        a, b, c = self.a, self.b, self.c
        if not a + b > c:
            raise TriangleError(f"violated a + b > c for sides ({a}, {b}, {c})")
        if not b + c > a:
            raise TriangleError(f"violated b + c > a for sides ({a}, {b}, {c})")
        if not c + a > b:
            raise TriangleError(f"violated c + a > b for sides ({a}, {b}, {c})")

    def __iter__(self):
        return iter((self.a, self.b, self.c))

    def scaled(self, factor: float) -> "SideTriple":
        return SideTriple(self.a * factor, self.b * factor, self.c * factor)


@dataclass(frozen=True)
class RaviTriple:
    """Ravi parameters m = s - a, n = s - b, p = s - c."""

    m: float
    n: float
    p: float

    def __post_init__(self):
        for name in ("m", "n", "p"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise TriangleError(f"Ravi parameter {name} must be positive, got {v!r}")

    def __iter__(self):
        return iter((self.m, self.n, self.p))


@dataclass(frozen=True)
class DerivedQuantities:
    a: float
    b: float
    c: float
    s: float
    S: float
    R: float
    r: float
    r_a: float
    r_b: float
    r_c: float
    h_a: float
    h_b: float
    h_c: float
    A: float
    B: float
    C: float
    tA: float
    tB: float
    tC: float
    degeneracy: float

    def bindings(self) -> Dict[str, float]:
        """Symbol table for expression evaluation."""
        return {f.name: getattr(self, f.name) for f in fields(self)}


def sides_from_ravi(rv: RaviTriple) -> SideTriple:
    m, n, p = rv
    return SideTriple(n + p, p + m, m + n)


def ravi_from_sides(sides: SideTriple) -> RaviTriple:
    a, b, c = sides
    return RaviTriple((b + c - a) / 2, (c + a - b) / 2, (a + b - c) / 2)


def normalize_perimeter(sides: SideTriple) -> SideTriple:
    """Rescale so that the semiperimeter is 1."""
    a, b, c = sides
    s = (a + b + c) / 2
    return SideTriple(a / s, b / s, c / s)


def _angle(opp, u, v):
    ratio = (u * u + v * v - opp * opp) / (2 * u * v)
    return np.arccos(np.clip(ratio, -1.0, 1.0))


def derive_arrays(a, b, c) -> Dict[str, np.ndarray]:
    """Vectorized core of :func:`derive`; no validation is done here."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    s = (a + b + c) / 2
    sa, sb, sc = s - a, s - b, s - c
    S = np.sqrt(s * sa * sb * sc)
    r = S / s
    R = a * b * c / (4 * S)
    return {
        "a": a, "b": b, "c": c,
        "s": s, "S": S, "R": R, "r": r,
        "r_a": S / sa, "r_b": S / sb, "r_c": S / sc,
        "h_a": 2 * S / a, "h_b": 2 * S / b, "h_c": 2 * S / c,
        "A": _angle(a, b, c), "B": _angle(b, c, a), "C": _angle(c, a, b),
        "tA": r / sa, "tB": r / sb, "tC": r / sc,
        "degeneracy": np.minimum(np.minimum(sa, sb), sc) / s,
    }


def derive(sides: SideTriple) -> DerivedQuantities:
    if not isinstance(sides, SideTriple):
        sides = SideTriple(*sides)
    q = derive_arrays(sides.a, sides.b, sides.c)
    return DerivedQuantities(**{k: float(v) for k, v in q.items()})


def degeneracy(sides: SideTriple) -> float:
    a, b, c = sides
    s = (a + b + c) / 2
    return min(s - a, s - b, s - c) / s


# --- identities -------------------------------------------------------------

IDENTITY_IDS = tuple(f"I{k}" for k in range(1, 18))


def _rel(lhs, rhs):
    den = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), RESIDUAL_EPS)
    return np.abs(lhs - rhs) / den


def identity_sides_arrays(a, b, c) -> Dict[str, List[Tuple[np.ndarray, np.ndarray]]]:
    """Both sides of every identity, keyed by identity id.

    Most identities have one (lhs, rhs) pair; I13 carries one pair per side
    plus the summed form.
    """
    q = derive_arrays(a, b, c)
    a, b, c = q["a"], q["b"], q["c"]
    s, S, R, r = q["s"], q["S"], q["R"], q["r"]
    sa, sb, sc = s - a, s - b, s - c
    x, y, z = b + c - a, c + a - b, a + b - c
    k = 4 * R + r
    sum_ab = a * b + b * c + c * a
    sum_sq = a * a + b * b + c * c
    cyc_ss = sa * sb + sb * sc + sc * sa
    heron = s * sa * sb * sc

    out = {}
    out["I1"] = [(S * S, (a + b + c) * x * y * z / 16)]
    out["I2"] = [(sum_ab, s * s + r * r + 4 * R * r)]
    out["I3"] = [(sum_sq, 2 * (s * s - r * r - 4 * R * r))]
    out["I4"] = [(x * y + y * z + z * x, 4 * r * k)]
    out["I5"] = [(x * y * z, 8 * s * r * r)]
    out["I6"] = [(cyc_ss, r * k)]
    out["I7"] = [((sa * sb) ** 2 + (sb * sc) ** 2 + (sc * sa) ** 2, cyc_ss ** 2 - 2 * s * s * r * r)]
    out["I8"] = [(k / s, (2 * sum_ab - sum_sq) / (4 * S))]
    out["I9"] = [(sa * sb / c + sb * sc / a + sc * sa / b, r * (s * s + k * k) / (4 * s * R))]
    out["I10"] = [(x * x + y * y + z * z, 4 * (s * s - 2 * r * r - 8 * R * r))]
    # constant is 16: sum of (s-a)^2(s-b)^2 is r^2((4R+r)^2 - 2s^2), times 2^4
    out["I11"] = [((x * y) ** 2 + (y * z) ** 2 + (z * x) ** 2, 16 * r * r * (k * k - 2 * s * s))]
    out["I12"] = [(1 / x ** 2 + 1 / y ** 2 + 1 / z ** 2, (k * k / (s * s * r * r) - 2 / (r * r)) / 4)]
    tA, tB, tC = q["tA"], q["tB"], q["tC"]
    out["I13"] = [
        (a * a, (b - c) ** 2 + 4 * S * tA),
        (b * b, (c - a) ** 2 + 4 * S * tB),
        (c * c, (a - b) ** 2 + 4 * S * tC),
        (sum_sq, (a - b) ** 2 + (b - c) ** 2 + (c - a) ** 2 + 4 * S * (tA + tB + tC)),
    ]
    out["I14"] = [(q["r_a"] / a + q["r_b"] / b + q["r_c"] / c, (k * k + s * s) / (4 * R * s))]
    out["I15"] = [(1 / x + 1 / y + 1 / z, k / (2 * s * r))]
    # Schur t=2 in product form; the expanded polynomial cancels badly near (1, 1, 0)
    schur2 = a * a * (a - b) * (a - c) + b * b * (b - c) * (b - a) + c * c * (c - a) * (c - b)
    out["I16"] = [((2 * sum_ab - sum_sq) ** 2 - 48 * heron, 4 * schur2)]
    # half-angle tangent via (1 - cos A)/sin A = (s-b)(s-c)/S
    out["I17"] = [
        (sb * sc / S, tA),
        (sc * sa / S, tB),
        (sa * sb / S, tC),
    ]
    return out


def identity_residuals_arrays(a, b, c) -> Dict[str, np.ndarray]:
    """Relative residual per identity (max over sub-forms) for arrays of sides."""
    res = {}
    for ident, pairs in identity_sides_arrays(a, b, c).items():
        res[ident] = np.max([_rel(lhs, rhs) for lhs, rhs in pairs], axis=0)
    return res


def identity_residuals(sides: SideTriple) -> List[Tuple[str, float]]:
    if not isinstance(sides, SideTriple):
        sides = SideTriple(*sides)
    res = identity_residuals_arrays(sides.a, sides.b, sides.c)
    return [(ident, float(res[ident])) for ident in IDENTITY_IDS]
