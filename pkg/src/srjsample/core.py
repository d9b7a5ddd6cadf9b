"""Geometry types, the seedable random source and Walker's alias table."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from ._jit import njit
from .errors import EmptyDistributionError, EmptyInputError, InvalidParameterError

__all__ = [
    "Point",
    "Window",
    "JoinPair",
    "PointSet",
    "as_point_set",
    "RandomSource",
    "AliasTable",
    "window_of",
    "contains",
    "alias_build",
    "alias_sample",
]


class Point(NamedTuple):
    id: int
    x: float
    y: float


class JoinPair(NamedTuple):
    r_id: int
    s_id: int


@dataclass(frozen=True)
class Window:
    """Closed axis-aligned rectangle ``[x_min, x_max] x [y_min, y_max]``."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max):
            raise InvalidParameterError(f"inverted window {self}")

    def contains(self, p) -> bool:
        return contains(self, p)


def window_of(center, hx: float, hy: float) -> Window:
    """Window with half-extents ``(hx, hy)`` centred at ``center``."""
    if not (math.isfinite(hx) and math.isfinite(hy)) or hx <= 0 or hy <= 0:
        raise InvalidParameterError(f"half-extents must be finite and positive, got ({hx}, {hy})")
    cx, cy = _xy(center)
    return Window(cx - hx, cx + hx, cy - hy, cy + hy)


def contains(w: Window, s) -> bool:
    """True iff ``s`` lies in ``w``; all four boundaries are inclusive."""
    x, y = _xy(s)
    return w.x_min <= x <= w.x_max and w.y_min <= y <= w.y_max


def _xy(p):
    if isinstance(p, Point):
        return p.x, p.y
    if len(p) == 3:
        return p[1], p[2]
    return p[0], p[1]


class PointSet:
    """Column-oriented point collection (``ids``, ``x``, ``y`` arrays).

    This is the bulk representation every index is built from; indexing
    returns :class:`Point` tuples.
    """

    __slots__ = ("ids", "x", "y")

    def __init__(self, ids, x, y, *, validate=True):
        ids = np.ascontiguousarray(ids, dtype=np.int64)
        x = np.ascontiguousarray(x, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        if validate:
            if not (ids.ndim == x.ndim == y.ndim == 1 and len(ids) == len(x) == len(y)):
                raise InvalidParameterError("ids, x and y must be 1-D arrays of equal length")
            if not (np.isfinite(x).all() and np.isfinite(y).all()):
                raise InvalidParameterError("coordinates must be finite")
        self.ids = ids
        self.x = x
        self.y = y

    @classmethod
    def from_points(cls, points: Iterable) -> "PointSet":
        pts = list(points)
        ids, xs, ys = [], [], []
        for i, p in enumerate(pts):
            if isinstance(p, Point):
                ids.append(p.id)
                xs.append(p.x)
                ys.append(p.y)
            elif len(p) == 3:
                ids.append(p[0])
                xs.append(p[1])
                ys.append(p[2])
            else:
                ids.append(i)
                xs.append(p[0])
                ys.append(p[1])
        return cls(ids, xs, ys)

    @classmethod
    def from_xy(cls, xy, ids=None) -> "PointSet":
        xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
        if ids is None:
            ids = np.arange(len(xy), dtype=np.int64)
        return cls(ids, xy[:, 0], xy[:, 1])

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, i) -> Point:
        return Point(int(self.ids[i]), float(self.x[i]), float(self.y[i]))

    def __iter__(self) -> Iterator[Point]:
        for i in range(len(self)):
            yield self[i]

    def __repr__(self):
        return f"PointSet(n={len(self)})"

    def take(self, idx) -> "PointSet":
        return PointSet(self.ids[idx], self.x[idx], self.y[idx], validate=False)

    def x_order(self) -> np.ndarray:
        """Permutation sorting by x, ties broken by id."""
        return np.lexsort((self.ids, self.x))

    def sorted_by_x(self) -> "PointSet":
        return self.take(self.x_order())

    def is_x_sorted(self) -> bool:
        return bool(np.all(self.x[1:] >= self.x[:-1]))

    def has_unique_ids(self) -> bool:
        return len(np.unique(self.ids)) == len(self.ids)

    @property
    def nbytes(self) -> int:
        return self.ids.nbytes + self.x.nbytes + self.y.nbytes


def as_point_set(points) -> PointSet:
    if isinstance(points, PointSet):
        return points
    if isinstance(points, np.ndarray):
        return PointSet.from_xy(points)
    return PointSet.from_points(points)


class RandomSource:
    """Seeded pseudorandom stream (PCG64 behind :class:`numpy.random.Generator`).

    The wrapped generator is handed directly to the compiled sampling
    kernels, so Python-level draws and kernel draws share one stream.
    """

    def __init__(self, seed: int | None = None):
        self.seed = seed
        self.generator = np.random.default_rng(seed)

    def uniform_int(self, a: int, b: int) -> int:
        """Integer in the closed range ``[a, b]``."""
        return int(self.generator.integers(a, b, endpoint=True))

    def uniform_unit(self) -> float:
        """Real in ``[0, 1)``."""
        return float(self.generator.random())

    def spawn(self, k: int) -> list["RandomSource"]:
        """Independent child streams for concurrent sampling."""
        children = []
        for g in self.generator.spawn(k):
            child = RandomSource.__new__(RandomSource)
            child.seed = None
            child.generator = g
            children.append(child)
        return children


@njit
def _alias_fill(w, prob, alias):
    # Vose's two-worklist construction; every index enters a worklist once.
    n = w.shape[0]
    total = 0.0
    for i in range(n):
        total += w[i]
    scaled = np.empty(n, dtype=np.float64)
    small = np.empty(n, dtype=np.int64)
    large = np.empty(n, dtype=np.int64)
    ns = 0
    nl = 0
    for i in range(n):
        scaled[i] = w[i] * n / total
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        g = large[nl - 1]
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            nl -= 1
            small[ns] = g
            ns += 1
    fallback = -1
    for i in range(n):
        if w[i] > 0:
            fallback = i
            break
    while nl > 0:
        nl -= 1
        g = large[nl]
        prob[g] = 1.0
        alias[g] = g
    while ns > 0:
        # rounding leftovers; a zero-weight column must stay unreachable
        ns -= 1
        s = small[ns]
        if w[s] > 0:
            prob[s] = 1.0
            alias[s] = s
        else:
            prob[s] = 0.0
            alias[s] = fallback
    return total


@njit
def _alias_fill_rows(w, prob, alias):
    """Row-wise alias tables for a 2-D weight matrix; all-zero rows get prob 0."""
    for i in range(w.shape[0]):
        tot = 0.0
        for j in range(w.shape[1]):
            tot += w[i, j]
        if tot > 0:
            _alias_fill(w[i], prob[i], alias[i])
        else:
            for j in range(w.shape[1]):
                prob[i, j] = 0.0
                alias[i, j] = j


_TWO53 = 9007199254740992  # 2**53


@njit(inline=True)
def rand_below(gen, n):
    """Exactly uniform integer in ``[0, n)`` for ``1 <= n <= 2**53``.

    ``gen.random()`` yields ``k / 2**53`` with ``k`` uniform on 53 bits;
    rejecting the top ``2**53 mod n`` values of ``k`` removes modulo bias.
    It is several times cheaper than ``gen.integers`` inside compiled code.
    """
    limit = _TWO53 - _TWO53 % n
    while True:
        v = np.int64(gen.random() * _TWO53)
        if v < limit:
            return v % n


@njit(inline=True)
def _alias_draw(gen, prob, alias):
    col = rand_below(gen, prob.shape[0])
    if gen.random() < prob[col]:
        return col
    return alias[col]


class AliasTable:
    """O(1)-draw discrete distribution proportional to nonnegative weights."""

    __slots__ = ("prob", "alias", "total", "weights")

    def __init__(self, prob: np.ndarray, alias: np.ndarray, total: float, weights: np.ndarray):
        self.prob = prob
        self.alias = alias
        self.total = total
        self.weights = weights

    @property
    def n(self) -> int:
        return len(self.prob)

    def sample(self, rng: RandomSource) -> int:
        return alias_sample(self, rng)

    def probabilities(self) -> np.ndarray:
        """Exact draw distribution from enumerating every (column, coin) outcome."""
        p = np.zeros(self.n)
        np.add.at(p, np.arange(self.n), self.prob / self.n)
        np.add.at(p, self.alias, (1.0 - self.prob) / self.n)
        return p

    @property
    def nbytes(self) -> int:
        return self.prob.nbytes + self.alias.nbytes


def alias_build(weights: Sequence[float] | np.ndarray) -> AliasTable:
    w = np.ascontiguousarray(weights, dtype=np.float64).ravel()
    if w.size == 0:
        raise EmptyInputError("no weights")
    if not np.isfinite(w).all():
        raise InvalidParameterError("weights must be finite")
    if (w < 0).any():
        raise InvalidParameterError("weights must be nonnegative")
    if not (w > 0).any():
        raise EmptyDistributionError("all weights are zero")
    prob = np.empty(w.size, dtype=np.float64)
    alias = np.empty(w.size, dtype=np.int64)
    total = _alias_fill(w, prob, alias)
    return AliasTable(prob, alias, float(total), w)


def alias_sample(t: AliasTable, rng: RandomSource) -> int:
    col = rng.uniform_int(0, t.n - 1)
    if rng.uniform_unit() < t.prob[col]:
        return col
    return int(t.alias[col])
