"""Gaps, gap minimization, dominance and violation search.

The normalized gap of an inequality at a point is the favored side minus the
other side, divided by ``s**degree`` (``s`` the semiperimeter, or half of
``x + y + z`` for positive triples). It is scale invariant for homogeneous
inequalities; inhomogeneous ones report the raw gap at the given scale.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .catalog import CatalogEntry
from .expr import (
    INDETERMINATE,
    INHOMOGENEOUS,
    TRIANGLE,
    TRIPLE,
    Compiled,
    EvaluationError,
    ExprError,
    InequalityDef,
    expand_cyc,
    inequality_degree,
    serialize,
)
from .sampler import SampleConfig, ravi_to_sides_array, triangle_array, triple_array
from .triangle import SideTriple, derive_arrays

VIOLATION_TOL = 1e-9
CHUNK = 1 << 15

CENTRE = np.array([1 / 3, 1 / 3, 1 / 3])


class SharpnessError(ValueError):
    pass


class DomainMismatch(SharpnessError):
    pass


@dataclass(frozen=True)
class GapReport:
    entry_id: str
    lhs_val: float
    rhs_val: float
    abs_gap: float
    normalized_gap: float
    holds: bool
    degree: Optional[float]


@dataclass(frozen=True)
class Violation:
    index: int
    point: Tuple[float, float, float]
    normalized_gap: float


@dataclass
class ScanReport:
    entry_id: str
    config: SampleConfig
    count: int
    min_normalized_gap: float
    argmin: Tuple[float, float, float]
    argmin_index: int
    violations: List[Violation] = field(default_factory=list)
    t: Optional[float] = None

    @property
    def holds(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class MinimizeResult:
    entry_id: str
    argmin: SideTriple
    min_normalized_gap: float
    evaluations: int
    converged: bool
    grid_min: float


@dataclass(frozen=True)
class DominanceReport:
    id1: str
    id2: str
    relation: str
    witness_first: Optional[SideTriple]
    witness_second: Optional[SideTriple]
    points: int
    first_exceeds: int
    second_exceeds: int
    max_first_margin: float
    max_second_margin: float


@dataclass(frozen=True)
class ViolationWitness:
    index: int
    sample: Tuple[float, float, float]
    normalized_gap: float
    shrunk: Tuple[float, float, float]
    shrunk_gap: float


# --- gap evaluation ---------------------------------------------------------

class _Target:
    """An inequality prepared for repeated vectorized gap evaluation."""

    def __init__(self, item: Union[CatalogEntry, InequalityDef], t: Optional[float] = None):
        if isinstance(item, CatalogEntry):
            self.id = item.id
            defn = item.defn
            degree = item.degree
            if item.parameterized:
                if t is None:
                    raise SharpnessError(f"{item.id}: parameter t is required")
                degree = inequality_degree(defn, t)
            elif defn.inhomogeneous:
                degree = None
        else:
            defn = item
            self.id = defn.name or defn.text()
            degree = None if defn.inhomogeneous else inequality_degree(defn, t)
            if degree in (INHOMOGENEOUS, INDETERMINATE):
                degree = None
        self.defn = defn
        self.domain = defn.domain
        self.degree = degree
        self.t = t
        self.lhs = Compiled(defn.lhs)
        self.rhs = Compiled(defn.rhs)

    def _env(self, points: np.ndarray):
        points = np.asarray(points, dtype=float)
        if self.domain == TRIANGLE:
            env = derive_arrays(points[..., 0], points[..., 1], points[..., 2])
            return env, env["s"]
        x, y, z = points[..., 0], points[..., 1], points[..., 2]
        return {"x": x, "y": y, "z": z}, (x + y + z) / 2

    def sides(self, points):
        """lhs, rhs, abs gap and normalized gap over an ``(n, 3)`` array."""
        env, s = self._env(points)
        try:
            lhs = self.lhs(env, self.t)
            rhs = self.rhs(env, self.t)
        except EvaluationError as exc:
            raise EvaluationError(f"{self.id}: {exc}") from exc
        lhs = np.broadcast_to(lhs, np.shape(s)).astype(float)
        rhs = np.broadcast_to(rhs, np.shape(s)).astype(float)
        gap = lhs - rhs if self.defn.rel == ">=" else rhs - lhs
        norm = gap if self.degree is None else gap / s ** self.degree
        return lhs, rhs, gap, norm

    def normalized(self, points) -> np.ndarray:
        return self.sides(points)[3]


def _check_domain(target: _Target, domain: str):
    if target.domain != domain:
        raise DomainMismatch(f"{target.id} is a {target.domain} inequality, not {domain}")


def gap(entry: Union[CatalogEntry, InequalityDef], sides, t: Optional[float] = None) -> GapReport:
    """Gap of ``entry`` at one triangle (or one positive triple)."""
    target = _Target(entry, t)
    if target.domain == TRIANGLE and not isinstance(sides, SideTriple):
        sides = SideTriple(*sides)
    point = np.array([tuple(sides)], dtype=float)
    if target.domain == TRIPLE and np.any(point <= 0):
        raise SharpnessError("positive triple required")
    lhs, rhs, g, norm = (float(v[0]) for v in target.sides(point))
    return GapReport(target.id, lhs, rhs, g, norm, norm >= -VIOLATION_TOL, target.degree)


def _points(cfg: SampleConfig) -> np.ndarray:
    return triangle_array(cfg) if cfg.domain == TRIANGLE else triple_array(cfg)


def _chunked(fn, n: int, workers: int):
    ranges = [(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]
    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda r: fn(*r), ranges))
    return [fn(*r) for r in ranges]


def scan(entry, cfg: SampleConfig, t: Optional[float] = None, workers: int = 1) -> ScanReport:
    target = _Target(entry, t)
    _check_domain(target, cfg.domain)
    points = _points(cfg)
    norm = np.concatenate(_chunked(lambda i, j: target.normalized(points[i:j]), len(points), workers))
    k = int(np.argmin(norm))
    bad = np.flatnonzero(norm < -VIOLATION_TOL)
    violations = [Violation(int(i), tuple(map(float, points[i])), float(norm[i])) for i in bad]
    return ScanReport(
        entry_id=target.id,
        config=cfg,
        count=len(points),
        min_normalized_gap=float(norm[k]),
        argmin=tuple(map(float, points[k])),
        argmin_index=k,
        violations=violations,
        t=t,
    )


def scan_values(entry, cfg: SampleConfig, t: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Sample points and their normalized gaps, for dumps and plotting."""
    target = _Target(entry, t)
    _check_domain(target, cfg.domain)
    points = _points(cfg)
    return points, target.normalized(points)


# --- minimization -----------------------------------------------------------

def barycentric_grid(g: int) -> np.ndarray:
    """Centroids of the ``g*g`` triangles subdividing the unit 2-simplex, as (m, n, p) rows."""
    i, j = np.meshgrid(np.arange(g), np.arange(g), indexing="ij")
    i, j = i.ravel(), j.ravel()
    up = i + j <= g - 1
    down = i + j <= g - 2
    m = np.concatenate([(i[up] + 1 / 3) / g, (i[down] + 2 / 3) / g])
    n = np.concatenate([(j[up] + 1 / 3) / g, (j[down] + 2 / 3) / g])
    return np.stack([m, n, 1.0 - m - n], axis=1)


def nelder_mead(func, x0, step, tol=1e-10, max_iter=500,
                alpha=1.0, gamma=2.0, rho=0.5, sigma=0.5):
    """Minimize ``func`` from ``x0`` with the Nelder-Mead simplex method.

    Stops when the simplex diameter drops below ``tol`` (converged) or after
    ``max_iter`` iterations. Returns ``(x, f, evaluations, converged)``.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = len(x0)
    simplex = [x0]
    for k in range(dim):
        v = x0.copy()
        v[k] += step
        simplex.append(v)
    values = [func(v) for v in simplex]
    evals = len(simplex)
    converged = False

    for _ in range(max_iter):
        order = np.argsort(values, kind="stable")
        simplex = [simplex[k] for k in order]
        values = [values[k] for k in order]
        pts = np.array(simplex)
        diameter = max(np.linalg.norm(p - q) for p in pts for q in pts)
        if diameter < tol:
            converged = True
            break

        centroid = pts[:-1].mean(axis=0)
        worst = pts[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = func(xr)
        evals += 1
        if values[0] <= fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = func(xe)
            evals += 1
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = centroid + rho * (xr - centroid)
        else:
            xc = centroid + rho * (worst - centroid)
        fc = func(xc)
        evals += 1
        if fc < min(fr, values[-1]):
            simplex[-1], values[-1] = xc, fc
            continue
        best = simplex[0]
        for k in range(1, dim + 1):
            simplex[k] = best + sigma * (simplex[k] - best)
            values[k] = func(simplex[k])
            evals += 1
    else:
        pts = np.array(simplex)
        diameter = max(np.linalg.norm(p - q) for p in pts for q in pts)
        converged = diameter < tol

    k = int(np.argmin(values))
    return simplex[k], values[k], evals, converged


def minimize_gap(entry, grid: int = 200, starts: int = 5, tol: float = 1e-10,
                 max_iter: int = 500, floor: float = 1e-6, t: Optional[float] = None) -> MinimizeResult:
    """Global minimum of the normalized gap over triangle shapes.

    A barycentric grid over the Ravi simplex is evaluated first; the best
    ``starts`` cells then seed Nelder-Mead runs in (m, n) coordinates.
    """
    target = _Target(entry, t)
    _check_domain(target, TRIANGLE)

    cells = barycentric_grid(grid)
    cells = cells[cells.min(axis=1) >= floor]
    gaps = target.normalized(ravi_to_sides_array(cells))
    order = np.lexsort((cells[:, 2], cells[:, 1], cells[:, 0], gaps))
    evaluations = len(cells)

    def objective(mn):
        w = np.array([mn[0], mn[1], 1.0 - mn[0] - mn[1]])
        if w.min() < floor:
            return np.inf
        try:
            return float(target.normalized(ravi_to_sides_array(w[None, :]))[0])
        except ExprError:
            return np.inf

    best_w = cells[order[0]]
    best_f = float(gaps[order[0]])
    best_converged = False
    for k in order[:starts]:
        x, f, n_eval, ok = nelder_mead(objective, cells[k, :2], step=1.0 / grid, tol=tol, max_iter=max_iter)
        evaluations += n_eval
        if f < best_f or (f == best_f and not best_converged):
            best_f = float(f)
            best_w = np.array([x[0], x[1], 1.0 - x[0] - x[1]])
            best_converged = ok
    a, b, c = ravi_to_sides_array(best_w)
    return MinimizeResult(
        entry_id=target.id,
        argmin=SideTriple(float(a), float(b), float(c)),
        min_normalized_gap=best_f,
        evaluations=evaluations,
        converged=bool(best_converged),
        grid_min=float(gaps[order[0]]),
    )


# --- dominance --------------------------------------------------------------

def _structural_key(node) -> str:
    return serialize(expand_cyc(node))


def compare_dominance(first: CatalogEntry, second: CatalogEntry, cfg: SampleConfig,
                      include_argmins: bool = True) -> DominanceReport:
    """Compare the bounds of two inequalities sharing the same bounded side.

    ``witness_first`` is a triangle where the first bound is strictly tighter
    by more than the violation tolerance, ``witness_second`` likewise for the
    second; the lowest-index witness is reported.
    """
    t1, t2 = _Target(first), _Target(second)
    for tg in (t1, t2):
        _check_domain(tg, TRIANGLE)
    _check_domain(t1, cfg.domain)
    if t1.defn.rel != t2.defn.rel:
        raise SharpnessError("relations differ")
    if _structural_key(t1.defn.lhs) != _structural_key(t2.defn.lhs):
        raise SharpnessError("bounded sides differ")
    if t1.degree is None or t2.degree is None or abs(t1.degree - t2.degree) > 1e-9:
        raise SharpnessError("degrees differ")

    points = np.asarray(_points(cfg))
    if include_argmins:
        extra = [minimize_gap(first).argmin, minimize_gap(second).argmin]
        points = np.vstack([points, np.array([tuple(e) for e in extra])])

    _, rhs1, _, _ = t1.sides(points)
    _, rhs2, _, _ = t2.sides(points)
    s = points.sum(axis=1) / 2
    margin = (rhs1 - rhs2) / s ** t1.degree
    if t1.defn.rel == "<=":
        margin = -margin

    first_idx = np.flatnonzero(margin > VIOLATION_TOL)
    second_idx = np.flatnonzero(margin < -VIOLATION_TOL)

    def witness(idx):
        if len(idx) == 0:
            return None
        a, b, c = points[idx[0]]
        return SideTriple(float(a), float(b), float(c))

    w1, w2 = witness(first_idx), witness(second_idx)
    if w1 is not None and w2 is not None:
        relation = "incomparable"
    elif w1 is not None:
        relation = "first_dominates"
    elif w2 is not None:
        relation = "second_dominates"
    else:
        relation = "equivalent"
    return DominanceReport(
        id1=t1.id,
        id2=t2.id,
        relation=relation,
        witness_first=w1,
        witness_second=w2,
        points=len(points),
        first_exceeds=len(first_idx),
        second_exceeds=len(second_idx),
        max_first_margin=float(max(margin.max(), 0.0)) + 0.0,
        max_second_margin=float(max(-margin.min(), 0.0)) + 0.0,
    )


# --- violation search -------------------------------------------------------

def _shrink(target: _Target, point: np.ndarray, iterations: int = 60):
    """Bisect from ``point`` toward the centre of shape space for a violating
    point as close to the centre as the tolerance allows."""
    if target.domain == TRIANGLE:
        s = point.sum() / 2
        far = (s - point) / s
        near = CENTRE.copy()
        to_point = ravi_to_sides_array
    else:
        far = point.copy()
        near = np.full(3, point.mean())
        to_point = lambda w: w  # noqa: E731

    def g(lam):
        w = near + lam * (far - near)
        p = to_point(w[None, :])
        return float(target.normalized(p)[0]), p[0]

    g0, p0 = g(0.0)
    if g0 < -VIOLATION_TOL:
        return p0, g0
    lo, hi = 0.0, 1.0
    g_hi, p_hi = g(hi)
    for _ in range(iterations):
        mid = (lo + hi) / 2
        g_mid, p_mid = g(mid)
        if g_mid < -VIOLATION_TOL:
            hi, g_hi, p_hi = mid, g_mid, p_mid
        else:
            lo = mid
    return p_hi, g_hi


def find_violation(defn: Union[InequalityDef, CatalogEntry], cfg: SampleConfig,
                   t: Optional[float] = None) -> Optional[ViolationWitness]:
    """Lowest-index sample violating ``defn``, shrunk toward the centre, or None."""
    target = _Target(defn, t)
    _check_domain(target, cfg.domain)
    n = cfg.count
    for start in range(0, n, CHUNK):
        stop = min(start + CHUNK, n)
        pts = triangle_array(cfg, start, stop) if cfg.domain == TRIANGLE else triple_array(cfg, start, stop)
        norm = target.normalized(pts)
        bad = np.flatnonzero(norm < -VIOLATION_TOL)
        if len(bad):
            k = int(bad[0])
            shrunk, shrunk_gap = _shrink(target, np.array(pts[k]))
            return ViolationWitness(
                index=start + k,
                sample=tuple(map(float, pts[k])),
                normalized_gap=float(norm[k]),
                shrunk=tuple(map(float, shrunk)),
                shrunk_gap=float(shrunk_gap),
            )
    return None


def dominance_margin(first: CatalogEntry, second: CatalogEntry, points: Sequence) -> np.ndarray:
    """Normalized rhs difference (first minus second) at the given side rows."""
    t1, t2 = _Target(first), _Target(second)
    points = np.asarray(points, dtype=float)
    _, r1, _, _ = t1.sides(points)
    _, r2, _, _ = t2.sides(points)
    return (r1 - r2) / (points.sum(axis=1) / 2) ** t1.degree
