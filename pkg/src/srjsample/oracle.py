"""Brute-force ground truth and statistical checks for the samplers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import JoinPair, Window, as_point_set
from .errors import CorrectnessViolation, InvalidParameterError, TooLargeError

__all__ = [
    "JoinResult",
    "UniformityReport",
    "LagReport",
    "BoundReport",
    "brute_force_join",
    "exact_range_count",
    "exact_cell_count",
    "pair_indices",
    "uniformity_test",
    "tv_distance",
    "null_tv_quantile",
    "lag_independence_test",
    "check_bounds",
]

MAX_PAIRS = 10**8
_CHUNK = 2**22  # pairs examined per vectorised block


@dataclass
class JoinResult:
    r_ids: np.ndarray  # sorted by (r_id, s_id)
    s_ids: np.ndarray
    r_index: np.ndarray  # positions in the R / S inputs
    s_index: np.ndarray

    @property
    def size(self) -> int:
        return len(self.r_ids)

    def __len__(self):
        return self.size

    @property
    def pairs(self) -> list[JoinPair]:
        return [JoinPair(int(a), int(b)) for a, b in zip(self.r_ids, self.s_ids)]

    def __contains__(self, pair) -> bool:
        r, s = pair
        idx = pair_indices(self, np.array([r]), np.array([s]), strict=False)
        return bool(idx[0] >= 0)


def brute_force_join(R, S, hx: float, hy: float) -> JoinResult:
    """All pairs with ``s`` in the closed window of half-extents ``(hx, hy)`` around ``r``."""
    R = as_point_set(R)
    S = as_point_set(S)
    if hx < 0 or hy < 0:
        raise InvalidParameterError("half-extents must be nonnegative")
    if len(R) * len(S) > MAX_PAIRS:
        raise TooLargeError(f"{len(R)} x {len(S)} pairs exceeds the brute-force guard of {MAX_PAIRS}")
    ri_parts, si_parts = [], []
    rows = max(1, _CHUNK // max(1, len(S)))
    for a in range(0, len(R), rows):
        rx = R.x[a : a + rows, None]
        ry = R.y[a : a + rows, None]
        hit = (rx - hx <= S.x) & (S.x <= rx + hx) & (ry - hy <= S.y) & (S.y <= ry + hy)
        i, j = np.nonzero(hit)
        ri_parts.append(i + a)
        si_parts.append(j)
    ri = np.concatenate(ri_parts) if ri_parts else np.empty(0, dtype=np.int64)
    si = np.concatenate(si_parts) if si_parts else np.empty(0, dtype=np.int64)
    order = np.lexsort((S.ids[si], R.ids[ri]))
    ri, si = ri[order].astype(np.int64), si[order].astype(np.int64)
    return JoinResult(R.ids[ri], S.ids[si], ri, si)


def exact_range_count(S, w: Window) -> int:
    S = as_point_set(S)
    return int(np.count_nonzero((w.x_min <= S.x) & (S.x <= w.x_max) & (w.y_min <= S.y) & (S.y <= w.y_max)))


def exact_cell_count(S, w: Window, key, cell_w: float, cell_h: float) -> int:
    """In-window points of S that belong to cell ``key`` (floor convention)."""
    S = as_point_set(S)
    ix, iy = key
    in_cell = (np.floor(S.x / cell_w) == ix) & (np.floor(S.y / cell_h) == iy)
    inside = (w.x_min <= S.x) & (S.x <= w.x_max) & (w.y_min <= S.y) & (S.y <= w.y_max)
    return int(np.count_nonzero(in_cell & inside))


def _as_id_arrays(samples):
    if hasattr(samples, "r_ids") and hasattr(samples, "s_ids"):
        return np.asarray(samples.r_ids), np.asarray(samples.s_ids)
    if isinstance(samples, tuple) and len(samples) == 2 and isinstance(samples[0], np.ndarray):
        return samples
    arr = np.asarray(list(samples), dtype=np.int64).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def pair_indices(truth: JoinResult, r_ids, s_ids, strict: bool = True) -> np.ndarray:
    """Position of each ``(r_id, s_id)`` in ``truth``; -1 (or an error) if absent."""
    r_ids = np.asarray(r_ids, dtype=np.int64)
    s_ids = np.asarray(s_ids, dtype=np.int64)
    if truth.size == 0:
        if strict and len(r_ids):
            raise CorrectnessViolation("sample drawn from an empty join")
        return np.full(len(r_ids), -1, dtype=np.int64)
    ur = np.unique(truth.r_ids)
    us = np.unique(truth.s_ids)
    base = len(us) + 1
    tkey = np.searchsorted(ur, truth.r_ids) * base + np.searchsorted(us, truth.s_ids)
    rk = np.searchsorted(ur, r_ids)
    sk = np.searchsorted(us, s_ids)
    ok = (rk < len(ur)) & (sk < len(us))
    ok[ok] &= (ur[rk[ok]] == r_ids[ok]) & (us[sk[ok]] == s_ids[ok])
    skey = rk * base + sk
    pos = np.searchsorted(tkey, skey)
    pos = np.minimum(pos, len(tkey) - 1)
    ok &= tkey[pos] == skey
    out = np.where(ok, pos, -1)
    if strict and not ok.all():
        bad = int(np.flatnonzero(~ok)[0])
        raise CorrectnessViolation(f"sampled pair ({int(r_ids[bad])}, {int(s_ids[bad])}) is not in the join")
    return out


@dataclass
class UniformityReport:
    draw_count: int
    n_pairs: int
    tv_distance: float
    chi_square: float
    dof: int
    p_value: float
    max_abs_freq_dev: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def tv_distance(counts: np.ndarray) -> float:
    """Total-variation distance between ``counts / sum`` and uniform."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    return float(0.5 * np.abs(counts / n - 1.0 / len(counts)).sum())


def uniformity_test(samples, truth: JoinResult) -> UniformityReport:
    r, s = _as_id_arrays(samples)
    idx = pair_indices(truth, r, s, strict=True)
    k = truth.size
    counts = np.bincount(idx, minlength=k).astype(np.float64)
    n = counts.sum()
    if n == 0:
        raise InvalidParameterError("no samples")
    expected = n / k
    chi = float(((counts - expected) ** 2 / expected).sum())
    dof = k - 1
    p = float(stats.chi2.sf(chi, dof)) if dof > 0 else 1.0
    return UniformityReport(
        int(n), k, tv_distance(counts), chi, dof, p, float(np.abs(counts / n - 1.0 / k).max())
    )


def null_tv_quantile(n_pairs: int, draws: int, q: float = 0.99, reps: int = 200, seed: int = 0) -> float:
    """Quantile of the TV distance of ``draws`` truly uniform picks over ``n_pairs``."""
    rng = np.random.default_rng(seed)
    p = np.full(n_pairs, 1.0 / n_pairs)
    tvs = [tv_distance(rng.multinomial(draws, p)) for _ in range(reps)]
    return float(np.quantile(tvs, q))


@dataclass
class LagReport:
    samples: int
    groups: int
    statistic: float
    dof: int
    p_value: float
    flagged: bool
    reason: str = ""


def lag_independence_test(samples, truth: JoinResult | None = None, groups: int = 8, alpha: float = 1e-3) -> LagReport:
    """Lag-1 contingency chi-square on pair ids coarsened to ``groups`` classes.

    Pair ``j`` (its index in ``truth``, or in the sorted distinct sample set)
    goes to class ``j mod groups``, so neighbouring pairs land in different
    classes.  A stream that occupies one class although at least two exist
    is flagged as degenerate.
    """
    r, s = _as_id_arrays(samples)
    if truth is not None:
        idx = pair_indices(truth, r, s, strict=True)
        n_cat = truth.size
    else:
        enc = np.stack([r, s], axis=1)
        _, idx = np.unique(enc, axis=0, return_inverse=True)
        idx = idx.ravel()
        n_cat = int(idx.max()) + 1 if len(idx) else 0
    k = min(groups, n_cat)
    if len(idx) < 2 or k < 2:
        return LagReport(len(idx), k, 0.0, 0, 1.0, False, "fewer than two classes")
    g = idx % k
    table = np.zeros((k, k))
    np.add.at(table, (g[:-1], g[1:]), 1)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if min(table.shape) < 2:
        return LagReport(len(idx), k, float("inf"), 0, 0.0, True, "stream occupies a single class")
    res = stats.chi2_contingency(table, correction=False)
    p = float(res.pvalue)
    return LagReport(len(idx), k, float(res.statistic), int(res.dof), p, p < alpha)


@dataclass
class BoundReport:
    checked: int
    soundness_violations: int  # mu(r) < |S(w(r))|
    tightness_violations: int  # mu(r) > capacity * (|S(w(r))| + 4)
    exact_violations: int  # center/edge slot != exact per-cell count

    @property
    def violations(self) -> int:
        return self.soundness_violations + self.tightness_violations + self.exact_violations

    @property
    def ok(self) -> bool:
        return self.violations == 0


def slot_counts(R, S, hx: float, hy: float):
    """Exact in-window counts of every r, split by neighbour slot of S's cell.

    Returns ``(per_slot, total)``; ``total`` counts every in-window point,
    including any that fell outside the 3x3 block.
    """
    R = as_point_set(R)
    S = as_point_set(S)
    if len(R) * len(S) > MAX_PAIRS:
        raise TooLargeError("instance too large for the per-slot oracle")
    out = np.zeros((len(R), 9), dtype=np.int64)
    total = np.zeros(len(R), dtype=np.int64)
    scx = np.floor(S.x / hx)
    scy = np.floor(S.y / hy)
    rows = max(1, _CHUNK // max(1, len(S)))
    for a in range(0, len(R), rows):
        rx = R.x[a : a + rows, None]
        ry = R.y[a : a + rows, None]
        inside = (rx - hx <= S.x) & (S.x <= rx + hx) & (ry - hy <= S.y) & (S.y <= ry + hy)
        total[a : a + rows] = inside.sum(axis=1)
        dx = scx - np.floor(rx / hx)
        dy = scy - np.floor(ry / hy)
        near = inside & (np.abs(dx) <= 1) & (np.abs(dy) <= 1)
        i, j = np.nonzero(near)
        slot = ((dy[i, j] + 1) * 3 + (dx[i, j] + 1)).astype(np.int64)
        np.add.at(out, (i + a, slot), 1)
    return out, total


def check_bounds(R, S, hx: float, hy: float, mu_cells: np.ndarray, capacity: int) -> BoundReport:
    """Compare per-slot upper bounds with brute-force counts."""
    exact, total = slot_counts(R, S, hx, hy)
    mu = mu_cells.sum(axis=1)
    exact_slots = [1, 3, 4, 5, 7]
    return BoundReport(
        len(total),
        int(np.count_nonzero(mu < total)),
        int(np.count_nonzero(mu > capacity * (total + 4))),
        int(np.count_nonzero((mu_cells[:, exact_slots] != exact[:, exact_slots]).any(axis=1))),
    )
