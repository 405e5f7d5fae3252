"""Built-in registry of triangle and positive-triple inequalities."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from .expr import (
    INDETERMINATE,
    INHOMOGENEOUS,
    TRIANGLE,
    TRIPLE,
    ExprError,
    InequalityDef,
    evaluate,
    format_definition,
    inequality_degree,
    parse_definitions,
    parse_inequality,
)
from .triangle import SideTriple, derive

EQUILATERAL = SideTriple(2 / 3, 2 / 3, 2 / 3)
UNIT_TRIPLE = (1.0, 1.0, 1.0)
TIGHT_TOL = 1e-12

# radicand shared by the second refinement and several of its corollaries
_RAD = "3 + 4*(R - 2*r)/(4*R + r)"


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    defn: InequalityDef
    reference: str
    tight: bool
    degree: Optional[float]
    notes: str = ""
    parameterized: bool = False

    @property
    def domain(self) -> str:
        return self.defn.domain

    def definition_line(self) -> str:
        return format_definition(self.defn)


# id, domain, inequality, reference, tight, degree, notes
_BUILTINS = [
    ("weitzenbock", TRIANGLE, "a^2 + b^2 + c^2 >= 4*S*sqrt(3)",
     "Weitzenböck inequality", True, 2, ""),
    ("chain_a", TRIANGLE, "a^2 + b^2 + c^2 >= a*b + b*c + c*a",
     "Weitzenböck chain, link 1", True, 2, ""),
    ("chain_b", TRIANGLE, "a*b + b*c + c*a >= cyc(a*sqrt(b*c))",
     "Weitzenböck chain, link 2", True, 2, ""),
    ("chain_c", TRIANGLE, "cyc(a*sqrt(b*c)) >= 3*cbrt(a^2*b^2*c^2)",
     "Weitzenböck chain, link 3", True, 2, ""),
    ("chain_d", TRIANGLE, "3*cbrt(a^2*b^2*c^2) >= 4*S*sqrt(3)",
     "Weitzenböck chain, link 4", True, 2, ""),
    ("chain_e", TRIANGLE, "3*cbrt(a^2*b^2*c^2) >= 18*R*r",
     "Weitzenböck chain with 18Rr endpoint", True, 2, ""),
    ("finsler_hadwiger", TRIANGLE, "a^2 + b^2 + c^2 >= 4*S*sqrt(3) + cyc((a - b)^2)",
     "Finsler-Hadwiger inequality", True, 2, ""),
    ("mitrinovic", TRIANGLE, "s <= 3*sqrt(3)/2*R",
     "Mitrinović inequality", True, 1, ""),
    ("four_R_plus_r", TRIANGLE, "4*R + r >= s*sqrt(3)",
     "4R + r >= s sqrt(3)", True, 1, "equivalent to the first refinement"),
    ("schur_t1", TRIPLE, "cyc(x*(x - y)*(x - z)) >= 0",
     "Schur inequality, t = 1", True, 3, ""),
    ("schur_t1_alt", TRIPLE, "2*(x*y + y*z + z*x) - (x^2 + y^2 + z^2) <= 9*x*y*z/(x + y + z)",
     "Schur inequality, t = 1, rational form", True, 2, ""),
    ("schur_t2", TRIPLE, "x^4 + y^4 + z^4 + 2*x*y*z*(x + y + z) >= (x^2 + y^2 + z^2)*(x*y + y*z + z*x)",
     "Schur inequality, t = 2", True, 4, ""),
    ("schur_general", TRIPLE, "cyc(x^t*(x - y)*(x - z)) >= 0",
     "Schur inequality, real parameter t", True, None, "degree is t + 2; t is supplied at check time"),
    ("schur_reciprocal", TRIPLE, "x*y/z + y*z/x + z*x/y + 9*x*y*z/(x*y + y*z + z*x) >= 2*(x + y + z)",
     "Schur inequality in reciprocal variables", True, 1, "x, y, z play the role of positive reals m, n, p"),
    ("reversed_18Rr", TRIANGLE, "a^2 + b^2 + c^2 <= 18*R*r + cyc((a - b)^2)",
     "Finsler-Hadwiger with 18Rr reverses", True, 2, "the >= direction fails off the equilateral triangle"),
    ("refinement_1", TRIANGLE, "a^2 + b^2 + c^2 >= 2*S*sqrt(3) + 2*r*(4*R + r) + cyc((a - b)^2)",
     "first Finsler-Hadwiger refinement", True, 2, ""),
    ("refinement_2", TRIANGLE, f"a^2 + b^2 + c^2 >= 4*S*sqrt({_RAD}) + cyc((a - b)^2)",
     "second Finsler-Hadwiger refinement", True, 2, ""),
    ("key_scalar", TRIANGLE, "((4*R + r)/s)^2 + 9*r/(4*R + r) >= 4",
     "R, r, s form of the second refinement", True, 0, ""),
    ("euler", TRIANGLE, "R >= 2*r",
     "Euler inequality", True, 1, ""),
    ("app1", TRIANGLE, "cyc(1/(b + c - a)) >= 1/(2*r)*sqrt(4 - 9*r/(4*R + r))",
     "reciprocal Ravi sum bound", True, -1,
     "statement repeats 1/(c+a-b); the three distinct terms are used"),
    ("app2_corrected", TRIANGLE, "cyc(1/(a*(b + c - a))) >= 1/(8*R*r)*(5 - 9*r/(4*R + r))",
     "weighted reciprocal Ravi sum bound", True, -2,
     "rhs r/(8R)(...) rescaled to 1/(8Rr)(...) so both sides have degree -2"),
    ("app2_as_printed", TRIANGLE, "cyc(1/(a*(b + c - a))) >= r/(8*R)*(5 - 9*r/(4*R + r))",
     "weighted reciprocal Ravi sum bound, uncorrected", False, None,
     "inhomogeneous: lhs degree -2, rhs degree 0; evaluated at semiperimeter 1"),
    ("app3", TRIANGLE, "cyc(1/(b + c - a)^2) >= 1/r^2*(1/2 - 9*r/(4*(4*R + r)))",
     "reciprocal squared Ravi sum bound", True, -2, ""),
    ("app4", TRIANGLE, "cyc(a^2/(b + c - a)) >= 3*R*sqrt(4 - 9*r/(4*R + r))",
     "Chebyshev-type Ravi sum bound", True, 1,
     "Chebyshev step repeats 1/(c+a-b); the three distinct terms are used"),
    ("app5", TRIANGLE, f"cyc(a/r_a) >= 2*sqrt({_RAD})",
     "side over exradius sum bound", True, 0, ""),
    ("app6", TRIANGLE, f"cyc(1/(h_a*r_a)) >= 1/S*sqrt({_RAD})",
     "altitude-exradius reciprocal sum bound", True, -2, ""),
    ("app7", TRIANGLE, f"cyc(tan(A/2)) >= sqrt({_RAD})",
     "half-angle tangent sum bound", True, 0, ""),
    ("app8", TRIANGLE, "cyc(r_a/a) >= s*(5*R - r)/(R*(4*R + r))",
     "exradius over side sum bound", True, 0, ""),
    ("schur_t2_sides", TRIANGLE, "cyc(a^4) + cyc(a^2*b*c) >= cyc(a*b*(a^2 + b^2))",
     "Schur inequality, t = 2, on side lengths", True, 4, "equivalent to Finsler-Hadwiger after squaring"),
    ("eighteen_Rr", TRIANGLE, "a^2 + b^2 + c^2 >= 18*R*r",
     "sum of squares against 18Rr", True, 2, ""),
]

CHAIN_IDS = ("chain_a", "chain_b", "chain_c", "chain_d")


def _equilateral_gap(defn: InequalityDef, t: Optional[float] = None) -> float:
    point = derive(EQUILATERAL) if defn.domain == TRIANGLE else UNIT_TRIPLE
    hi, lo = defn.favored()
    return evaluate(hi, point, t) - evaluate(lo, point, t)


def _make_entry(id_, domain, text, reference, tight, degree, notes) -> CatalogEntry:
    inhomogeneous = degree is None and id_ != "schur_general"
    defn = parse_inequality(text, domain, id_, inhomogeneous=inhomogeneous)
    return CatalogEntry(
        id=id_,
        defn=defn,
        reference=reference,
        tight=tight,
        degree=None if degree is None else float(degree),
        notes=notes,
        parameterized=id_ == "schur_general",
    )


_BUILTIN_CACHE: Optional[List[CatalogEntry]] = None


def builtin_catalog() -> List[CatalogEntry]:
    global _BUILTIN_CACHE
    if _BUILTIN_CACHE is None:
        _BUILTIN_CACHE = [_make_entry(*row) for row in _BUILTINS]
    return list(_BUILTIN_CACHE)


BUILTIN_IDS = tuple(row[0] for row in _BUILTINS)


def entry_from_definition(defn: InequalityDef, allow_inhomogeneous: bool = False) -> CatalogEntry:
    """Wrap a user definition, checking homogeneity and equality at the centre."""
    degree = inequality_degree(defn)
    if degree == INHOMOGENEOUS or degree == INDETERMINATE:
        if not allow_inhomogeneous:
            raise CatalogError(f"{defn.name}: definition is {degree} (pass allow_inhomogeneous to accept it)")
        degree = None
        defn = InequalityDef(defn.name, defn.domain, defn.lhs, defn.rel, defn.rhs, inhomogeneous=True)
    try:
        tight = abs(_equilateral_gap(defn)) <= TIGHT_TOL
    except ExprError:
        tight = False
    return CatalogEntry(defn.name, defn, "user definition", tight, degree)


class Registry:
    """Built-in entries plus any loaded definition files."""

    def __init__(self, entries: Optional[Iterable[CatalogEntry]] = None):
        self._entries: Dict[str, CatalogEntry] = {}
        for e in builtin_catalog() if entries is None else entries:
            self._entries[e.id] = e

    def __contains__(self, id_: str) -> bool:
        return id_ in self._entries

    def __iter__(self):
        return iter(self._entries.values())

    def __len__(self):
        return len(self._entries)

    def get(self, id_: str) -> CatalogEntry:
        try:
            return self._entries[id_]
        except KeyError:
            raise CatalogError(f"unknown entry id {id_!r}") from None

    def add(self, entry: CatalogEntry):
        if entry.id in self._entries:
            raise CatalogError(f"duplicate id {entry.id!r}")
        self._entries[entry.id] = entry

    def load_file(self, path, allow_inhomogeneous: bool = False) -> List[CatalogEntry]:
        return load_user_file(path, self, allow_inhomogeneous)

    def export(self) -> str:
        return export_definitions(self)


def lookup(id_: str) -> CatalogEntry:
    for e in builtin_catalog():
        if e.id == id_:
            return e
    raise CatalogError(f"unknown entry id {id_!r}")


def load_user_file(path, registry: Optional[Registry] = None, allow_inhomogeneous: bool = False) -> List[CatalogEntry]:
    """Parse a definition file; entries are added to ``registry`` if given.

    The whole file is validated before anything is added.
    """
    text = Path(path).read_text(encoding="utf-8")
    taken = set(BUILTIN_IDS) | ({e.id for e in registry} if registry is not None else set())
    entries = []
    for lineno, defn in parse_definitions(text):
        if defn.name in taken:
            raise CatalogError(f"line {lineno}: duplicate id {defn.name!r}")
        try:
            entry = entry_from_definition(defn, allow_inhomogeneous)
        except CatalogError as exc:
            raise CatalogError(f"line {lineno}: {exc}") from exc
        taken.add(defn.name)
        entries.append(entry)
    if registry is not None:
        for e in entries:
            registry.add(e)
    return entries


def export_definitions(entries: Optional[Iterable[CatalogEntry]] = None) -> str:
    entries = builtin_catalog() if entries is None else list(entries)
    lines = ["# id : domain : inequality"]
    for e in entries:
        comment = e.reference + (f"; {e.notes}" if e.notes else "")
        lines.append(f"# {comment}")
        lines.append(e.definition_line())
    return "\n".join(lines) + "\n"


def chain_values(bindings) -> List:
    """The five chain quantities, largest first."""
    from .expr import parse_expr

    exprs = [
        "a^2 + b^2 + c^2",
        "a*b + b*c + c*a",
        "cyc(a*sqrt(b*c))",
        "3*cbrt(a^2*b^2*c^2)",
        "4*S*sqrt(3)",
    ]
    return [evaluate(parse_expr(e), bindings) for e in exprs]


def is_tight_at_centre(entry: CatalogEntry, t: Optional[float] = None) -> bool:
    if entry.defn.inhomogeneous:
        return False
    if entry.parameterized and t is None:
        t = 1.0
    return math.isclose(_equilateral_gap(entry.defn, t), 0.0, abs_tol=TIGHT_TOL)
