"""Grid + BBST join sampler: structure building, upper bounding, sampling.

Every pair ``(r, s)`` of the join is produced by one sampling iteration
with probability exactly ``1 / sum_mu``; iterations whose draw lands on a
point outside ``w(r)`` or on a phantom bucket slot are rejected and the
whole iteration restarts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional

import numpy as np

from ._jit import lower_bound_col, njit, upper_bound_col
from .bbst import MAX_TREE, MIN_TREE, BBSTIndex, build_index, bucket_capacity, corner_point, corner_walk
from .core import (
    AliasTable,
    JoinPair,
    PointSet,
    RandomSource,
    _alias_draw,
    _alias_fill_rows,
    alias_build,
    as_point_set,
    rand_below,
)
from .errors import AttemptLimitError, EmptyInputError, InvalidParameterError
from .grid import Grid, find_cell, grid_map

__all__ = [
    "StructureSet",
    "CountingIndex",
    "SampleBatch",
    "build_structures",
    "compute_upper_bound",
    "build_counting_index",
    "sample_join",
    "iter_samples",
    "sample_once",
    "enumerate_outcomes",
    "default_attempt_cap",
]


class GridArrays(NamedTuple):
    """Grid storage packed for the compiled kernels."""

    keys: np.ndarray  # sorted packed cell keys
    cell: np.ndarray  # (n_cells, 2) point range [lo, hi)
    pts: np.ndarray  # (m, 3): x, y in cell order, then y sorted within each cell
    y_order: np.ndarray  # cell-order index of each y-sorted position


PX, PY, PY_SORTED = range(3)


@dataclass
class StructureSet:
    grid: Grid
    bbst: BBSTIndex
    r_points: PointSet
    hx: float
    hy: float
    capacity: int
    timings: dict = field(default_factory=dict)

    def __post_init__(self):
        g = self.grid
        self.r_xy = np.ascontiguousarray(np.stack([self.r_points.x, self.r_points.y], axis=1))
        self.arrays = GridArrays(
            g.keys,
            np.ascontiguousarray(np.stack([g.cell_lo, g.cell_hi], axis=1).astype(np.int64)),
            np.ascontiguousarray(np.stack([g.points.x, g.points.y, g.y_sorted], axis=1)),
            g.y_order,
        )

    @property
    def nbytes(self) -> int:
        # the grid's y_sorted copy and the bucket table are counted once
        return self.grid.nbytes + self.bbst.nbytes + self.r_points.nbytes


def build_structures(R, S, hx: float, hy: float, capacity: Optional[int] = None) -> StructureSet:
    """Grid-map S and build the MIN/MAX BBST pair of every cell.

    ``capacity`` defaults to ``max(1, ceil(log2 |S|))``.
    """
    S = as_point_set(S)
    R = as_point_set(R)
    if len(S) == 0:
        raise EmptyInputError("S is empty")
    if capacity is None:
        capacity = bucket_capacity(len(S))
    if capacity < 1:
        raise InvalidParameterError("capacity must be >= 1")
    timings = {}
    t0 = time.perf_counter()
    if not S.is_x_sorted():
        S = S.sorted_by_x()
    grid = grid_map(S, hx, hy)
    t1 = time.perf_counter()
    index = build_index(grid, capacity)
    grid.bbst = index
    t2 = time.perf_counter()
    timings["grid_map"] = t1 - t0
    timings["structure_build"] = t2 - t1
    return StructureSet(grid, index, R, float(hx), float(hy), int(capacity), timings)


# ---------------------------------------------------------------------------
# kernels


@njit
def _slot_bound(ga, f, cap, slot, c, wx0, wx1, wy0, wy1):
    lo = ga.cell[c, 0]
    hi = ga.cell[c, 1]
    if slot == 4:
        return hi - lo
    if slot == 3:
        return hi - lower_bound_col(ga.pts, PX, lo, hi, wx0)
    if slot == 5:
        return upper_bound_col(ga.pts, PX, lo, hi, wx1) - lo
    if slot == 1:
        return hi - lower_bound_col(ga.pts, PY_SORTED, lo, hi, wy0)
    if slot == 7:
        return upper_bound_col(ga.pts, PY_SORTED, lo, hi, wy1) - lo
    if slot == 0:
        return corner_walk(f, f.root[c, MAX_TREE], wx0, True, wy0, True, cap, -1)[0]
    if slot == 6:
        return corner_walk(f, f.root[c, MAX_TREE], wx0, True, wy1, False, cap, -1)[0]
    if slot == 2:
        return corner_walk(f, f.root[c, MIN_TREE], wx1, False, wy0, True, cap, -1)[0]
    return corner_walk(f, f.root[c, MIN_TREE], wx1, False, wy1, False, cap, -1)[0]


@njit
def _slot_point(ga, f, cap, slot, c, wx0, wx1, wy0, wy1, offset):
    """Point selected by budget unit ``offset`` of a slot, or -1 (phantom)."""
    lo = ga.cell[c, 0]
    hi = ga.cell[c, 1]
    if slot == 4 or slot == 5:
        return lo + offset
    if slot == 3:
        return lower_bound_col(ga.pts, PX, lo, hi, wx0) + offset
    if slot == 1:
        return ga.y_order[lower_bound_col(ga.pts, PY_SORTED, lo, hi, wy0) + offset]
    if slot == 7:
        return ga.y_order[lo + offset]
    if slot == 0:
        return corner_point(f, f.root[c, MAX_TREE], wx0, True, wy0, True, cap, offset)
    if slot == 6:
        return corner_point(f, f.root[c, MAX_TREE], wx0, True, wy1, False, cap, offset)
    if slot == 2:
        return corner_point(f, f.root[c, MIN_TREE], wx1, False, wy0, True, cap, offset)
    return corner_point(f, f.root[c, MIN_TREE], wx1, False, wy1, False, cap, offset)


@njit
def _upper_bounds(r_xy, hx, hy, ga, f, cap, out, cells):
    # cells[i, slot] keeps the neighbour cell index (-1 if absent) so the
    # sampling loop never searches the key array again
    for i in range(r_xy.shape[0]):
        x = r_xy[i, 0]
        y = r_xy[i, 1]
        wx0 = x - hx
        wx1 = x + hx
        wy0 = y - hy
        wy1 = y + hy
        ix = np.int64(np.floor(x / hx))
        iy = np.int64(np.floor(y / hy))
        for slot in range(9):
            c = find_cell(ga.keys, ix + slot % 3 - 1, iy + slot // 3 - 1)
            cells[i, slot] = c
            if c < 0:
                out[i, slot] = 0
            else:
                out[i, slot] = _slot_bound(ga, f, cap, slot, c, wx0, wx1, wy0, wy1)


@njit
def _sample_loop(gen, t, max_reject, streak, r_prob, r_alias, c_prob, slot_meta, r_xy, hx, hy, ga, f, cap,
                 out_r, out_s):
    attempts = 0
    rej_window = 0
    rej_slot = 0
    got = 0
    while got < t:
        if streak >= max_reject:
            return got, attempts, rej_window, rej_slot, streak, 1
        attempts += 1
        i = _alias_draw(gen, r_prob, r_alias)
        # per-r alias over the nine slots, inlined on the packed row
        col = rand_below(gen, 9)
        slot = col if gen.random() < c_prob[i, col] else slot_meta[i, col, META_ALIAS]
        x = r_xy[i, 0]
        y = r_xy[i, 1]
        offset = rand_below(gen, slot_meta[i, slot, META_MU])
        c = slot_meta[i, slot, META_CELL]
        s = _slot_point(ga, f, cap, slot, c, x - hx, x + hx, y - hy, y + hy, offset)
        if s < 0:
            rej_slot += 1
            streak += 1
            continue
        sx = ga.pts[s, PX]
        sy = ga.pts[s, PY]
        if x - hx <= sx and sx <= x + hx and y - hy <= sy and sy <= y + hy:
            out_r[got] = i
            out_s[got] = s
            got += 1
            streak = 0
        else:
            rej_window += 1
            streak += 1
    return got, attempts, rej_window, rej_slot, streak, 0


# ---------------------------------------------------------------------------
# counting phase


def compute_upper_bound(r, s: StructureSet) -> tuple[int, np.ndarray]:
    """``(mu(r), per-slot bounds)`` for a single query point."""
    x, y = (r.x, r.y) if hasattr(r, "x") else (r[-2], r[-1])
    out = np.zeros((1, 9), dtype=np.int64)
    _upper_bounds(
        np.array([[x, y]], dtype=np.float64), s.hx, s.hy, s.arrays, s.bbst.forest, s.capacity, out,
        np.empty((1, 9), dtype=np.int64),
    )
    return int(out[0].sum()), out[0]


META_ALIAS, META_MU, META_CELL = range(3)


@dataclass
class CountingIndex:
    # (n, 9, 3) int64 per slot: alias target, bound, grid cell index (-1 if
    # absent). Kept together so one draw touches a single cache line per r.
    slot_meta: np.ndarray
    mu_total: np.ndarray
    cell_prob: np.ndarray
    global_alias: Optional[AliasTable]
    sum_mu: int
    timings: dict = field(default_factory=dict)

    @property
    def mu_cells(self) -> np.ndarray:
        """(n, 9) per-slot bounds, slot order of ``grid.SLOT_NAMES``."""
        return self.slot_meta[:, :, META_MU]

    @property
    def cells(self) -> np.ndarray:
        return self.slot_meta[:, :, META_CELL]

    @property
    def cell_alias(self) -> np.ndarray:
        return self.slot_meta[:, :, META_ALIAS]

    @property
    def empty(self) -> bool:
        """True when every bound is zero, which forces an empty join."""
        return self.sum_mu == 0

    @property
    def nbytes(self) -> int:
        a = self.slot_meta.nbytes + self.mu_total.nbytes + self.cell_prob.nbytes
        return a + (self.global_alias.nbytes if self.global_alias is not None else 0)


def build_counting_index(R, s: StructureSet) -> CountingIndex:
    """Bound every ``r`` and build the per-r cell aliases and the global alias."""
    R = s.r_points if R is None else as_point_set(R)
    t0 = time.perf_counter()
    meta = np.zeros((len(R), 9, 3), dtype=np.int64)
    mu = meta[:, :, META_MU]
    r_xy = s.r_xy if R is s.r_points else np.ascontiguousarray(np.stack([R.x, R.y], axis=1))
    _upper_bounds(r_xy, s.hx, s.hy, s.arrays, s.bbst.forest, s.capacity, mu, meta[:, :, META_CELL])
    total = mu.sum(axis=1)
    t1 = time.perf_counter()
    cprob = np.empty((len(R), 9), dtype=np.float64)
    _alias_fill_rows(mu.astype(np.float64), cprob, meta[:, :, META_ALIAS])
    sum_mu = int(total.sum())
    galias = alias_build(total.astype(np.float64)) if sum_mu > 0 else None
    t2 = time.perf_counter()
    return CountingIndex(meta, total, cprob, galias, sum_mu, {"upper_bound": t1 - t0, "alias_build": t2 - t1})


# ---------------------------------------------------------------------------
# sampling phase


@dataclass
class SampleBatch:
    r_index: np.ndarray  # positions in R
    s_index: np.ndarray  # positions in the grid's point order
    r_ids: np.ndarray
    s_ids: np.ndarray
    attempts: int = 0
    rejected_window: int = 0
    rejected_slot: int = 0

    def __len__(self):
        return len(self.r_ids)

    @property
    def pairs(self) -> list[JoinPair]:
        return [JoinPair(int(a), int(b)) for a, b in zip(self.r_ids, self.s_ids)]

    @property
    def acceptance_rate(self) -> float:
        return len(self) / self.attempts if self.attempts else float("nan")


def default_attempt_cap(m: int) -> int:
    return 10**7 * max(1, (max(m, 1) - 1).bit_length())


class _Stream:
    """Resumable sampling state; one RandomSource per stream."""

    def __init__(self, idx: CountingIndex, s: StructureSet, rng: RandomSource, max_rejections):
        self.idx = idx
        self.s = s
        self.rng = rng
        self.max_rejections = default_attempt_cap(s.grid.m) if max_rejections is None else int(max_rejections)
        self.streak = 0
        self.attempts = 0
        self.rejected_window = 0
        self.rejected_slot = 0

    def draw(self, t: int):
        idx, s = self.idx, self.s
        out_r = np.empty(t, dtype=np.int64)
        out_s = np.empty(t, dtype=np.int64)
        got, att, rw, rs, self.streak, status = _sample_loop(
            self.rng.generator, t, self.max_rejections, self.streak,
            idx.global_alias.prob, idx.global_alias.alias, idx.cell_prob, idx.slot_meta,
            s.r_xy, s.hx, s.hy, s.arrays, s.bbst.forest,
            s.capacity, out_r, out_s,
        )
        self.attempts += att
        self.rejected_window += rw
        self.rejected_slot += rs
        if status:
            raise AttemptLimitError(
                f"{self.streak} consecutive rejections (sum_mu={idx.sum_mu}); the join is probably empty"
            )
        return out_r[:got], out_s[:got]


def sample_join(idx: CountingIndex, s: StructureSet, t: int, rng: RandomSource, max_rejections=None) -> SampleBatch:
    """Draw ``t`` independent uniform join pairs (with replacement)."""
    if t < 0:
        raise InvalidParameterError("t must be nonnegative")
    if idx.empty or t == 0:
        e = np.empty(0, dtype=np.int64)
        return SampleBatch(e, e, e, e)
    st = _Stream(idx, s, rng, max_rejections)
    t0 = time.perf_counter()
    ri, si = st.draw(t)
    idx.timings["sampling"] = time.perf_counter() - t0
    return SampleBatch(
        ri, si, s.r_points.ids[ri], s.grid.points.ids[si], st.attempts, st.rejected_window, st.rejected_slot
    )


def iter_samples(idx: CountingIndex, s: StructureSet, rng: RandomSource, chunk: int = 4096,
                 max_rejections=None) -> Iterator[JoinPair]:
    """Endless stream of join pairs; stop consuming whenever enough are in hand."""
    if idx.empty:
        return
    st = _Stream(idx, s, rng, max_rejections)
    rids, sids = s.r_points.ids, s.grid.points.ids
    while True:
        ri, si = st.draw(chunk)
        for a, b in zip(rids[ri], sids[si]):
            yield JoinPair(int(a), int(b))


def sample_once(idx: CountingIndex, s: StructureSet, rng: RandomSource):
    """One iteration in Python: returns ``(r_index, slot, s_index, accepted)``.

    ``s_index`` is -1 when a phantom slot was drawn.
    """
    i = idx.global_alias.sample(rng)
    slot = AliasTable(idx.cell_prob[i], idx.cell_alias[i], float(idx.mu_total[i]), idx.mu_cells[i]).sample(rng)
    offset = rng.uniform_int(0, int(idx.mu_cells[i, slot]) - 1)
    p = _resolve(idx, s, i, slot, offset)
    if p < 0:
        return i, slot, -1, False
    return i, slot, p, _inside(s, i, p)


def _resolve(idx, s, i, slot, offset):
    x, y = s.r_points.x[i], s.r_points.y[i]
    return int(
        _slot_point(s.arrays, s.bbst.forest, s.capacity, slot, idx.cells[i, slot],
                    x - s.hx, x + s.hx, y - s.hy, y + s.hy, offset)
    )


def _inside(s, i, p):
    x, y = s.r_points.x[i], s.r_points.y[i]
    px, py = s.grid.points.x[p], s.grid.points.y[p]
    return bool(x - s.hx <= px <= x + s.hx and y - s.hy <= py <= y + s.hy)


def enumerate_outcomes(idx: CountingIndex, s: StructureSet) -> tuple[dict, float]:
    """Exact per-iteration outcome distribution of the sampler.

    Walks every branch of one iteration: each (column, coin) outcome of both
    alias tables and every budget unit of the chosen slot, resolving units
    with the same routine the sampling kernel uses.  Returns
    ``({(r_index, s_index): probability}, rejection_probability)``.
    """
    accepted: dict = {}
    rejected = 0.0
    if idx.empty:
        return accepted, 1.0
    p_r = idx.global_alias.probabilities()
    for i in np.flatnonzero(p_r > 0):
        cells = AliasTable(idx.cell_prob[i], idx.cell_alias[i], float(idx.mu_total[i]), idx.mu_cells[i])
        p_slot = cells.probabilities()
        for slot in np.flatnonzero(p_slot > 0):
            mu = int(idx.mu_cells[i, slot])
            unit = p_r[i] * p_slot[slot] / mu
            for off in range(mu):
                p = _resolve(idx, s, int(i), int(slot), off)
                if p >= 0 and _inside(s, i, p):
                    key = (int(i), p)
                    accepted[key] = accepted.get(key, 0.0) + unit
                else:
                    rejected += unit
    return accepted, rejected
