"""Numerical verification and sharpness analysis of triangle inequalities."""

__version__ = "0.1.0"

from .triangle import (  # noqa: E402
    DerivedQuantities,
    RaviTriple,
    SideTriple,
    TriangleError,
    derive,
    identity_residuals,
    normalize_perimeter,
    ravi_from_sides,
    sides_from_ravi,
)
from .expr import InequalityDef, evaluate, expand_cyc, homogeneity_degree, parse, serialize  # noqa: E402
from .catalog import CatalogEntry, Registry, builtin_catalog, load_user_file, lookup  # noqa: E402
from .sampler import SampleConfig, sample_positive_triples, sample_triangles  # noqa: E402
from .sharpness import compare_dominance, find_violation, gap, minimize_gap, scan  # noqa: E402

__all__ = [
    "CatalogEntry",
    "DerivedQuantities",
    "InequalityDef",
    "RaviTriple",
    "Registry",
    "SampleConfig",
    "SideTriple",
    "TriangleError",
    "builtin_catalog",
    "compare_dominance",
    "derive",
    "evaluate",
    "expand_cyc",
    "find_violation",
    "gap",
    "homogeneity_degree",
    "identity_residuals",
    "load_user_file",
    "lookup",
    "minimize_gap",
    "normalize_perimeter",
    "parse",
    "ravi_from_sides",
    "sample_positive_triples",
    "sample_triangles",
    "scan",
    "serialize",
    "sides_from_ravi",
]
