"""kd-tree baselines: KDS (exact counts) and KDS-rejection (grid upper bounds).

The kd-tree is implicit over a permutation of S: the subtree for range
``[lo, hi)`` has its splitting point at ``mid = (lo + hi) // 2`` and the
split axis alternates with depth.  ``bx0/bx1/by0/by1[mid]`` hold the
bounding box of the subtree, ``hi - lo`` is its exact point count.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._jit import njit
from .core import AliasTable, PointSet, RandomSource, Window, _alias_draw, alias_build, as_point_set, rand_below
from .errors import AttemptLimitError, EmptyInputError, InvalidParameterError
from .grid import Grid, find_cell, grid_map
from .sampler import SampleBatch, default_attempt_cap

__all__ = [
    "KdTree",
    "RangeDecomposition",
    "kd_build",
    "kd_range_count",
    "kd_decompose",
    "kd_range_pick",
    "kd_range_sample",
    "KDSState",
    "KDSRState",
    "kds_prepare",
    "kds_sample",
    "kds_sample_join",
    "kdsr_prepare",
    "kdsr_sample",
    "kdsr_sample_join",
]

_STACK = 256


class KdArrays(NamedTuple):
    perm: np.ndarray  # tree position -> index into S
    x: np.ndarray  # coordinates in tree order
    y: np.ndarray
    bx0: np.ndarray
    bx1: np.ndarray
    by0: np.ndarray
    by1: np.ndarray


@njit
def _select(perm, key, lo, hi, k):
    # in-place 3-way quickselect on perm[lo:hi] by key[perm]
    while hi - lo > 1:
        a = key[perm[lo]]
        b = key[perm[(lo + hi) // 2]]
        c = key[perm[hi - 1]]
        if a > b:
            a, b = b, a
        if b > c:
            b = c
        pivot = a if a > b else b
        lt = lo
        i = lo
        gt = hi
        while i < gt:
            v = key[perm[i]]
            if v < pivot:
                perm[lt], perm[i] = perm[i], perm[lt]
                lt += 1
                i += 1
            elif v > pivot:
                gt -= 1
                perm[gt], perm[i] = perm[i], perm[gt]
            else:
                i += 1
        if k < lt:
            hi = lt
        elif k >= gt:
            lo = gt
        else:
            return


@njit
def _kd_build(x, y):
    m = x.shape[0]
    perm = np.arange(m)
    bx0 = np.empty(m)
    bx1 = np.empty(m)
    by0 = np.empty(m)
    by1 = np.empty(m)
    st_lo = np.empty(_STACK, dtype=np.int64)
    st_hi = np.empty(_STACK, dtype=np.int64)
    st_d = np.empty(_STACK, dtype=np.int64)
    st_lo[0] = 0
    st_hi[0] = m
    st_d[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        lo = st_lo[sp]
        hi = st_hi[sp]
        d = st_d[sp]
        if hi <= lo:
            continue
        mid = (lo + hi) // 2
        _select(perm, x if d % 2 == 0 else y, lo, hi, mid)
        x0 = np.inf
        x1 = -np.inf
        y0 = np.inf
        y1 = -np.inf
        for p in range(lo, hi):
            q = perm[p]
            x0 = min(x0, x[q])
            x1 = max(x1, x[q])
            y0 = min(y0, y[q])
            y1 = max(y1, y[q])
        bx0[mid] = x0
        bx1[mid] = x1
        by0[mid] = y0
        by1[mid] = y1
        st_lo[sp] = mid + 1
        st_hi[sp] = hi
        st_d[sp] = d + 1
        st_lo[sp + 1] = lo
        st_hi[sp + 1] = mid
        st_d[sp + 1] = d + 1
        sp += 2
    return perm, x[perm], y[perm], bx0, bx1, by0, by1


@njit
def _kd_decompose(k, wx0, wx1, wy0, wy1, out_lo, out_hi, out_pt):
    """Fill disjoint ``[lo, hi)`` tree ranges covering exactly the in-window points.

    Fully covered subtrees give their whole range; partially covered ones
    contribute their splitting point as a length-1 range flagged in
    ``out_pt``.  Returns the number of entries.
    """
    m = k.x.shape[0]
    st_lo = np.empty(_STACK, dtype=np.int64)
    st_hi = np.empty(_STACK, dtype=np.int64)
    st_lo[0] = 0
    st_hi[0] = m
    sp = 1
    n = 0
    while sp > 0:
        sp -= 1
        lo = st_lo[sp]
        hi = st_hi[sp]
        if hi <= lo:
            continue
        mid = (lo + hi) // 2
        if k.bx1[mid] < wx0 or k.bx0[mid] > wx1 or k.by1[mid] < wy0 or k.by0[mid] > wy1:
            continue
        if wx0 <= k.bx0[mid] and k.bx1[mid] <= wx1 and wy0 <= k.by0[mid] and k.by1[mid] <= wy1:
            out_lo[n] = lo
            out_hi[n] = hi
            out_pt[n] = False
            n += 1
            continue
        px = k.x[mid]
        py = k.y[mid]
        if wx0 <= px and px <= wx1 and wy0 <= py and py <= wy1:
            out_lo[n] = mid
            out_hi[n] = mid + 1
            out_pt[n] = True
            n += 1
        st_lo[sp] = mid + 1
        st_hi[sp] = hi
        st_lo[sp + 1] = lo
        st_hi[sp + 1] = mid
        sp += 2
    return n


@njit
def _kd_count(k, wx0, wx1, wy0, wy1):
    m = k.x.shape[0]
    st_lo = np.empty(_STACK, dtype=np.int64)
    st_hi = np.empty(_STACK, dtype=np.int64)
    st_lo[0] = 0
    st_hi[0] = m
    sp = 1
    total = 0
    while sp > 0:
        sp -= 1
        lo = st_lo[sp]
        hi = st_hi[sp]
        if hi <= lo:
            continue
        mid = (lo + hi) // 2
        if k.bx1[mid] < wx0 or k.bx0[mid] > wx1 or k.by1[mid] < wy0 or k.by0[mid] > wy1:
            continue
        if wx0 <= k.bx0[mid] and k.bx1[mid] <= wx1 and wy0 <= k.by0[mid] and k.by1[mid] <= wy1:
            total += hi - lo
            continue
        px = k.x[mid]
        py = k.y[mid]
        if wx0 <= px and px <= wx1 and wy0 <= py and py <= wy1:
            total += 1
        st_lo[sp] = mid + 1
        st_hi[sp] = hi
        st_lo[sp + 1] = lo
        st_hi[sp + 1] = mid
        sp += 2
    return total


@njit
def _pick(out_lo, out_hi, n, offset):
    # entry weights are range lengths; offset indexes the concatenation
    for e in range(n):
        w = out_hi[e] - out_lo[e]
        if offset < w:
            return out_lo[e] + offset
        offset -= w
    return -1


@njit
def _kd_counts(k, rx, ry, hx, hy, out):
    for i in range(rx.shape[0]):
        out[i] = _kd_count(k, rx[i] - hx, rx[i] + hx, ry[i] - hy, ry[i] + hy)


@dataclass
class KdTree:
    points: PointSet  # S in its original order
    arrays: KdArrays

    def __len__(self):
        return len(self.points)

    @property
    def nbytes(self) -> int:
        return sum(a.nbytes for a in self.arrays) + self.points.nbytes

    def subtree_count(self, lo: int, hi: int) -> int:
        return hi - lo

    def height(self) -> int:
        return int(len(self)).bit_length()


@dataclass
class RangeDecomposition:
    subtrees: list  # (lo, hi) tree-order ranges fully inside the window
    points: list  # tree positions of individual in-window boundary points

    @property
    def weights(self) -> list[int]:
        return [hi - lo for lo, hi in self.subtrees]

    @property
    def total(self) -> int:
        return sum(self.weights) + len(self.points)


def kd_build(S) -> KdTree:
    S = as_point_set(S)
    if len(S) == 0:
        raise EmptyInputError("S is empty")
    return KdTree(S, KdArrays(*_kd_build(S.x, S.y)))


def _w(w: Window):
    return float(w.x_min), float(w.x_max), float(w.y_min), float(w.y_max)


def kd_range_count(t: KdTree, w: Window) -> int:
    return int(_kd_count(t.arrays, *_w(w)))


def _decompose_arrays(t: KdTree, w: Window):
    lo = np.empty(len(t) + 1, dtype=np.int64)
    hi = np.empty(len(t) + 1, dtype=np.int64)
    pt = np.empty(len(t) + 1, dtype=np.bool_)
    n = _kd_decompose(t.arrays, *_w(w), lo, hi, pt)
    return lo, hi, n, pt


def kd_decompose(t: KdTree, w: Window) -> RangeDecomposition:
    lo, hi, n, pt = _decompose_arrays(t, w)
    d = RangeDecomposition([], [])
    for a, b, single in zip(lo[:n], hi[:n], pt[:n]):
        if single:
            d.points.append(int(a))
        else:
            d.subtrees.append((int(a), int(b)))
    return d


def kd_range_pick(t: KdTree, w: Window, offset: int) -> int:
    """Index into S of unit ``offset`` of the window's decomposition."""
    lo, hi, n, _ = _decompose_arrays(t, w)
    p = int(_pick(lo, hi, n, int(offset)))
    if p < 0:
        raise InvalidParameterError(f"offset {offset} outside the window's {int((hi[:n] - lo[:n]).sum())} points")
    return int(t.arrays.perm[p])


def kd_range_sample(t: KdTree, w: Window, rng: RandomSource):
    """Uniform point of ``S(w)``; returns ``(Point, |S(w)|)``."""
    lo, hi, n, _ = _decompose_arrays(t, w)
    total = int((hi[:n] - lo[:n]).sum())
    if total == 0:
        raise InvalidParameterError("window contains no point of S")
    p = int(_pick(lo, hi, n, rng.uniform_int(0, total - 1)))
    return t.points[int(t.arrays.perm[p])], total


# ---------------------------------------------------------------------------
# join samplers


@njit
def _kds_loop(gen, t, r_prob, r_alias, rx, ry, hx, hy, k, out_r, out_s):
    m = k.x.shape[0]
    buf_lo = np.empty(m + 1, dtype=np.int64)
    buf_hi = np.empty(m + 1, dtype=np.int64)
    buf_pt = np.empty(m + 1, dtype=np.bool_)
    for j in range(t):
        i = _alias_draw(gen, r_prob, r_alias)
        n = _kd_decompose(k, rx[i] - hx, rx[i] + hx, ry[i] - hy, ry[i] + hy, buf_lo, buf_hi, buf_pt)
        total = 0
        for e in range(n):
            total += buf_hi[e] - buf_lo[e]
        p = _pick(buf_lo, buf_hi, n, rand_below(gen, total))
        out_r[j] = i
        out_s[j] = k.perm[p]
    return t


@njit
def _kdsr_loop(gen, t, max_reject, r_prob, r_alias, mu, rx, ry, hx, hy, k, out_r, out_s):
    m = k.x.shape[0]
    buf_lo = np.empty(m + 1, dtype=np.int64)
    buf_hi = np.empty(m + 1, dtype=np.int64)
    buf_pt = np.empty(m + 1, dtype=np.bool_)
    got = 0
    attempts = 0
    streak = 0
    while got < t:
        if streak >= max_reject:
            return got, attempts, 1
        attempts += 1
        i = _alias_draw(gen, r_prob, r_alias)
        n = _kd_decompose(k, rx[i] - hx, rx[i] + hx, ry[i] - hy, ry[i] + hy, buf_lo, buf_hi, buf_pt)
        total = 0
        for e in range(n):
            total += buf_hi[e] - buf_lo[e]
        if total == 0:
            streak += 1
            continue
        p = _pick(buf_lo, buf_hi, n, rand_below(gen, total))
        # accept with probability |S(w(r))| / mu(r)
        if rand_below(gen, mu[i]) < total:
            out_r[got] = i
            out_s[got] = k.perm[p]
            got += 1
            streak = 0
        else:
            streak += 1
    return got, attempts, 0


@njit
def _cell_sums(keys, cell_count, rx, ry, hx, hy, out):
    for i in range(rx.shape[0]):
        ix = np.int64(np.floor(rx[i] / hx))
        iy = np.int64(np.floor(ry[i] / hy))
        tot = 0
        for dy in range(-1, 2):
            for dx in range(-1, 2):
                c = find_cell(keys, ix + dx, iy + dy)
                if c >= 0:
                    tot += cell_count[c]
        out[i] = tot


@dataclass
class KDSState:
    tree: KdTree
    r_points: PointSet
    hx: float
    hy: float
    counts: np.ndarray
    alias: AliasTable | None
    timings: dict = field(default_factory=dict)

    @property
    def join_size(self) -> int:
        return int(self.counts.sum())

    @property
    def nbytes(self) -> int:
        return self.tree.nbytes + self.r_points.nbytes + self.counts.nbytes + (self.alias.nbytes if self.alias else 0)


@dataclass
class KDSRState:
    tree: KdTree
    grid: Grid
    r_points: PointSet
    hx: float
    hy: float
    mu: np.ndarray
    alias: AliasTable | None
    timings: dict = field(default_factory=dict)

    @property
    def sum_mu(self) -> int:
        return int(self.mu.sum())

    @property
    def nbytes(self) -> int:
        a = self.tree.nbytes + self.grid.nbytes + self.r_points.nbytes + self.mu.nbytes
        return a + (self.alias.nbytes if self.alias else 0)


def _check_extents(hx, hy):
    if not (hx > 0 and hy > 0 and np.isfinite(hx) and np.isfinite(hy)):
        raise InvalidParameterError(f"half-extents must be finite and positive, got ({hx}, {hy})")


def kds_prepare(R, S, hx: float, hy: float, tree: KdTree | None = None) -> KDSState:
    """Build (or reuse) the kd-tree, count every window exactly, build the alias."""
    _check_extents(hx, hy)
    R = as_point_set(R)
    t0 = time.perf_counter()
    tree = kd_build(S) if tree is None else tree
    t1 = time.perf_counter()
    counts = np.zeros(len(R), dtype=np.int64)
    _kd_counts(tree.arrays, R.x, R.y, float(hx), float(hy), counts)
    t2 = time.perf_counter()
    alias = alias_build(counts.astype(np.float64)) if counts.sum() > 0 else None
    t3 = time.perf_counter()
    timings = {"structure_build": t1 - t0, "upper_bound": t2 - t1, "alias_build": t3 - t2}
    return KDSState(tree, R, float(hx), float(hy), counts, alias, timings)


def _batch(ri, si, r_points, s_points, attempts, rejected=0):
    return SampleBatch(ri, si, r_points.ids[ri], s_points.ids[si], int(attempts), int(rejected), 0)


def _empty_batch():
    e = np.empty(0, dtype=np.int64)
    return SampleBatch(e, e, e, e)


def kds_sample(st: KDSState, t: int, rng: RandomSource) -> SampleBatch:
    if st.alias is None or t == 0:
        return _empty_batch()
    out_r = np.empty(t, dtype=np.int64)
    out_s = np.empty(t, dtype=np.int64)
    t0 = time.perf_counter()
    _kds_loop(rng.generator, t, st.alias.prob, st.alias.alias, st.r_points.x, st.r_points.y, st.hx, st.hy,
              st.tree.arrays, out_r, out_s)
    st.timings["sampling"] = time.perf_counter() - t0
    return _batch(out_r, out_s, st.r_points, st.tree.points, t)


def kds_sample_join(R, S, hx: float, hy: float, t: int, rng: RandomSource) -> SampleBatch:
    """Exact-count weighted r, then a uniform point of ``S(w(r))``; never rejects."""
    return kds_sample(kds_prepare(R, S, hx, hy), t, rng)


def kdsr_prepare(R, S, hx: float, hy: float, tree: KdTree | None = None) -> KDSRState:
    """kd-tree plus a grid whose nine-cell counts bound every window."""
    _check_extents(hx, hy)
    R = as_point_set(R)
    S = as_point_set(S)
    t0 = time.perf_counter()
    tree = kd_build(S) if tree is None else tree
    t1 = time.perf_counter()
    Sx = S if S.is_x_sorted() else S.sorted_by_x()
    grid = grid_map(Sx, hx, hy)
    t2 = time.perf_counter()
    mu = np.zeros(len(R), dtype=np.int64)
    _cell_sums(grid.keys, grid.counts(), R.x, R.y, float(hx), float(hy), mu)
    t3 = time.perf_counter()
    alias = alias_build(mu.astype(np.float64)) if mu.sum() > 0 else None
    t4 = time.perf_counter()
    timings = {"structure_build": t1 - t0, "grid_map": t2 - t1, "upper_bound": t3 - t2, "alias_build": t4 - t3}
    return KDSRState(tree, grid, R, float(hx), float(hy), mu, alias, timings)


def kdsr_sample(st: KDSRState, t: int, rng: RandomSource, max_rejections=None) -> SampleBatch:
    if st.alias is None or t == 0:
        return _empty_batch()
    cap = default_attempt_cap(len(st.tree)) if max_rejections is None else int(max_rejections)
    out_r = np.empty(t, dtype=np.int64)
    out_s = np.empty(t, dtype=np.int64)
    t0 = time.perf_counter()
    got, attempts, status = _kdsr_loop(rng.generator, t, cap, st.alias.prob, st.alias.alias, st.mu,
                                       st.r_points.x, st.r_points.y, st.hx, st.hy, st.tree.arrays, out_r, out_s)
    st.timings["sampling"] = time.perf_counter() - t0
    if status:
        raise AttemptLimitError(f"{cap} consecutive rejections; the join is probably empty")
    return _batch(out_r, out_s, st.r_points, st.tree.points, attempts, attempts - got)


def kdsr_sample_join(R, S, hx: float, hy: float, t: int, rng: RandomSource, max_rejections=None) -> SampleBatch:
    """Nine-cell upper bounds, then accept a KDS draw with probability ``|S(w(r))| / mu(r)``."""
    return kdsr_sample(kdsr_prepare(R, S, hx, hy), t, rng, max_rejections)
