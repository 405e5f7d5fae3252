"""Seeded, counter-based generation of triangles and positive triples.

Sample ``i`` of a stream is drawn from its own Philox generator keyed by
``(seed, kind)`` with counter ``i``, so any index range can be produced
independently of every other one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Tuple

import numpy as np

from .triangle import SideTriple

TRIANGLE_KINDS = ("ravi_uniform", "sides_rejection", "near_degenerate", "isoceles_sweep", "near_equilateral")
TRIPLE_KINDS = ("log_uniform",)
KINDS = TRIANGLE_KINDS + TRIPLE_KINDS

TRIPLE_LOW = 1e-3
TRIPLE_HIGH = 1e3

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SampleConfig:
    kind: str = "ravi_uniform"
    count: int = 1000
    seed: int = 0
    min_degeneracy: float = 1e-6

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"count must be a positive integer, got {self.count!r}")
        if not 0 < self.min_degeneracy < 1 / 3:
            raise ValueError(f"min_degeneracy must lie in (0, 1/3), got {self.min_degeneracy!r}")

    @property
    def domain(self) -> str:
        return "positive-triple" if self.kind in TRIPLE_KINDS else "triangle"


def _generator(seed: int, kind: str, index: int) -> np.random.Generator:
    key = [seed & _MASK64, KINDS.index(kind)]
    return np.random.Generator(np.random.Philox(key=key, counter=[0, index, 0, 0]))


def _ravi_uniform(rng, floor):
    while True:
        w = -np.log(1.0 - rng.random(3))
        w /= w.sum()
        if w.min() >= floor * (1 + 1e-9):
            return w


def _sides_rejection(rng, floor):
    while True:
        a, b, c = rng.random(3)
        s = (a + b + c) / 2
        if min(s - a, s - b, s - c) >= floor * (1 + 1e-9) * s and min(a, b, c) > 0:
            return np.array([s - a, s - b, s - c]) / s


def _near_degenerate(rng, floor):
    hi = max(1e-2, floor)
    while True:
        u = rng.random(3)
        eps = math.exp(math.log(floor) + u[0] * (math.log(hi) - math.log(floor)))
        rest = 1.0 - eps
        w = np.array([eps, rest * u[1], rest * (1.0 - u[1])])
        if w.min() >= floor * (1 + 1e-9):
            return w[np.roll(np.arange(3), int(u[2] * 3))]


def _near_equilateral(rng, floor):
    u = rng.random()
    eps = 10.0 ** (-8 + 7 * u)
    d = rng.standard_normal(3)
    d -= d.mean()
    d /= max(np.abs(d).max(), 1e-300)
    w = 1 / 3 + eps * d / 3
    return w / w.sum()


def _isoceles_sweep(index, count, floor):
    # apex m runs from the flat end (m = floor) to the needle end (n = floor),
    # passing the equilateral point m = 1/3 at the middle of the sweep
    u = (index + 1) / (count + 1)
    m_hi = 1.0 - 2.0 * floor
    if u <= 0.5:
        m = floor + (1 / 3 - floor) * (2 * u)
    else:
        m = 1 / 3 + (m_hi - 1 / 3) * (2 * u - 1)
    n = (1.0 - m) / 2
    return np.array([m, n, n])


_RAVI_DRAWS = {
    "ravi_uniform": _ravi_uniform,
    "sides_rejection": _sides_rejection,
    "near_degenerate": _near_degenerate,
    "near_equilateral": _near_equilateral,
}


def ravi_sample(cfg: SampleConfig, index: int) -> np.ndarray:
    """Ravi parameters (summing to 1) of triangle ``index`` of the stream."""
    if cfg.kind == "isoceles_sweep":
        return _isoceles_sweep(index, cfg.count, cfg.min_degeneracy)
    if cfg.kind not in _RAVI_DRAWS:
        raise ValueError(f"sampler kind {cfg.kind!r} does not produce triangles")
    return _RAVI_DRAWS[cfg.kind](_generator(cfg.seed, cfg.kind, index), cfg.min_degeneracy)


def ravi_to_sides_array(w: np.ndarray) -> np.ndarray:
    """Map Ravi rows (m, n, p) to perimeter-2 side rows (a, b, c)."""
    w = np.asarray(w, dtype=float)
    w = w / w.sum(axis=-1, keepdims=True)
    m, n, p = w[..., 0], w[..., 1], w[..., 2]
    return np.stack([n + p, p + m, m + n], axis=-1)


@lru_cache(maxsize=32)
def _triangle_block(cfg: SampleConfig, start: int, stop: int) -> np.ndarray:
    w = np.array([ravi_sample(cfg, i) for i in range(start, stop)]).reshape(-1, 3)
    out = ravi_to_sides_array(w)
    out.setflags(write=False)
    return out


def triangle_array(cfg: SampleConfig, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Samples ``start:stop`` of the stream as an ``(n, 3)`` array of sides."""
    stop = cfg.count if stop is None else min(stop, cfg.count)
    return _triangle_block(cfg, start, stop)


def sample_triangles(cfg: SampleConfig) -> Iterator[SideTriple]:
    for a, b, c in triangle_array(cfg):
        yield SideTriple(float(a), float(b), float(c))


def triple_sample(cfg: SampleConfig, index: int) -> np.ndarray:
    rng = _generator(cfg.seed, "log_uniform", index)
    lo, hi = math.log10(TRIPLE_LOW), math.log10(TRIPLE_HIGH)
    return 10.0 ** (lo + (hi - lo) * rng.random(3))


@lru_cache(maxsize=32)
def _triple_block(cfg: SampleConfig, start: int, stop: int) -> np.ndarray:
    out = np.array([triple_sample(cfg, i) for i in range(start, stop)]).reshape(-1, 3)
    out = np.clip(out, TRIPLE_LOW, TRIPLE_HIGH)
    out.setflags(write=False)
    return out


def triple_array(cfg: SampleConfig, start: int = 0, stop: int | None = None) -> np.ndarray:
    stop = cfg.count if stop is None else min(stop, cfg.count)
    return _triple_block(cfg, start, stop)


def sample_positive_triples(cfg: SampleConfig) -> Iterator[Tuple[float, float, float]]:
    for x, y, z in triple_array(cfg):
        yield float(x), float(y), float(z)
