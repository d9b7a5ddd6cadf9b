"""Data ingestion, synthetic generation, benchmarking and the verify suite."""

from __future__ import annotations

import csv
import os
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .baselines import kds_prepare, kds_sample, kdsr_prepare, kdsr_sample
from .catalog import Instance, micro_catalog
from .core import PointSet, RandomSource, as_point_set
from .errors import CSVFormatError, EmptyInputError, InvalidParameterError, TooLargeError
from .oracle import (
    MAX_PAIRS,
    brute_force_join,
    check_bounds,
    lag_independence_test,
    null_tv_quantile,
    pair_indices,
    uniformity_test,
)
from .sampler import SampleBatch, build_counting_index, build_structures, enumerate_outcomes, sample_join

__all__ = [
    "DOMAIN",
    "ALGORITHMS",
    "Dataset",
    "BenchReport",
    "load_csv",
    "write_points_csv",
    "write_pairs_csv",
    "read_pairs_csv",
    "normalize",
    "normalize_and_split",
    "generate",
    "run_algorithm",
    "VerifyResult",
    "verify_instance",
    "verify_catalog",
]

DOMAIN = 10000.0
ALGORITHMS = ("bbst", "kds", "kds-rejection", "oracle")
PHASES = ("grid_map", "structure_build", "upper_bound", "alias_build", "sampling")


@dataclass
class Dataset:
    points: PointSet
    source: str
    normalized: bool = False

    def __len__(self):
        return len(self.points)


# ---------------------------------------------------------------------------
# CSV


def load_csv(path) -> Dataset:
    """Read an ``id,x,y`` CSV with a header line."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    ids, xs, ys = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyInputError(f"{path}: empty file")
        if [h.strip() for h in header] != ["id", "x", "y"]:
            raise CSVFormatError(f"expected header 'id,x,y', got {','.join(header)!r}", line=1, path=path)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise CSVFormatError(f"expected 3 fields, got {len(row)}", line=line, path=path)
            try:
                i, x, y = int(row[0]), float(row[1]), float(row[2])
            except ValueError as e:
                raise CSVFormatError(str(e), line=line, path=path) from None
            if not (np.isfinite(x) and np.isfinite(y)):
                raise CSVFormatError("non-finite coordinate", line=line, path=path)
            ids.append(i)
            xs.append(x)
            ys.append(y)
    ids_a = np.array(ids, dtype=np.int64)
    uniq, counts = np.unique(ids_a, return_counts=True)
    if (counts > 1).any():
        raise CSVFormatError(f"duplicate id {int(uniq[counts > 1][0])}", path=path)
    pts = PointSet(ids_a, np.array(xs, dtype=np.float64), np.array(ys, dtype=np.float64))
    return Dataset(pts, path, False)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_points_csv(path, points) -> None:
    points = as_point_set(points)
    with open(path, "w", newline="") as fh:
        fh.write("id,x,y\n")
        fh.writelines(f"{int(i)},{_fmt(x)},{_fmt(y)}\n" for i, x, y in zip(points.ids, points.x, points.y))


def write_pairs_csv(path, r_ids, s_ids) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("r_id,s_id\n")
        fh.writelines(f"{int(a)},{int(b)}\n" for a, b in zip(r_ids, s_ids))


def read_pairs_csv(path) -> tuple[np.ndarray, np.ndarray]:
    arr = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    return arr[:, 0], arr[:, 1]


# ---------------------------------------------------------------------------
# preprocessing and generators


def normalize(points, domain: float = DOMAIN) -> PointSet:
    """Affine per-axis rescale onto ``[0, domain]``."""
    points = as_point_set(points)
    cols = []
    for name, v in (("x", points.x), ("y", points.y)):
        if len(v) == 0:
            cols.append(v.copy())
            continue
        lo, hi = v.min(), v.max()
        if hi == lo:
            warnings.warn(f"degenerate {name} axis (all values {lo}); mapped to 0", stacklevel=2)
            cols.append(np.zeros_like(v))
        else:
            cols.append(np.clip((v - lo) * (domain / (hi - lo)), 0.0, domain))
    return PointSet(points.ids.copy(), cols[0], cols[1])


def normalize_and_split(d, ratio: float = 0.5, seed: int = 0) -> tuple[PointSet, PointSet]:
    """Rescale to the domain, then put each point in R with probability ``ratio``.

    Both parts come back sorted by x.
    """
    if not 0.0 < ratio < 1.0:
        raise InvalidParameterError(f"ratio must lie in (0, 1), got {ratio}")
    pts = d.points if isinstance(d, Dataset) else as_point_set(d)
    pts = pts if isinstance(d, Dataset) and d.normalized else normalize(pts)
    to_r = np.random.default_rng(seed).random(len(pts)) < ratio
    R = pts.take(np.flatnonzero(to_r)).sorted_by_x()
    S = pts.take(np.flatnonzero(~to_r)).sorted_by_x()
    return R, S


def generate(kind: str, count: int, params: Optional[dict] = None, seed: int = 0) -> Dataset:
    """Synthetic points on ``[0, DOMAIN]^2``.

    Parameters
    ----------
    kind : {"uniform", "gaussian_clusters"}
    count : int
    params : dict, optional
        For clusters: ``k`` (number of centres, default 10) and ``sigma``
        (default 200). ``domain`` overrides the side length for both kinds.
    seed : int
    """
    given = dict(params or {})
    params = dict(given)
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    domain = float(params.pop("domain", DOMAIN))
    if not domain > 0:
        raise InvalidParameterError("domain must be positive")
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        if params:
            raise InvalidParameterError(f"unknown parameters for uniform: {sorted(params)}")
        xy = rng.uniform(0.0, domain, size=(count, 2))
    elif kind == "gaussian_clusters":
        k = int(params.pop("k", 10))
        sigma = float(params.pop("sigma", 200.0))
        if params:
            raise InvalidParameterError(f"unknown parameters for gaussian_clusters: {sorted(params)}")
        if k < 1 or sigma < 0 or not np.isfinite(sigma):
            raise InvalidParameterError("need k >= 1 and a finite sigma >= 0")
        centers = rng.uniform(0.0, domain, size=(k, 2))
        which = rng.integers(0, k, size=count)
        xy = np.clip(centers[which] + rng.normal(0.0, 1.0, size=(count, 2)) * sigma, 0.0, domain)
    else:
        raise InvalidParameterError(f"unknown kind {kind!r}")
    source = f"{kind}(count={count}, seed={seed}" + "".join(f", {a}={b}" for a, b in sorted(given.items())) + ")"
    return Dataset(PointSet.from_xy(xy), source, True)


# ---------------------------------------------------------------------------
# benchmarking


@dataclass
class BenchReport:
    algo: str
    grid_map: float = 0.0
    structure_build: float = 0.0
    upper_bound: float = 0.0
    alias_build: float = 0.0
    sampling: float = 0.0
    total: float = 0.0
    attempts: int = 0
    sum_mu: int = 0
    samples: int = 0
    memory_bytes: int = 0
    exact_join_size: Optional[int] = None

    def rows(self) -> list[tuple[str, object]]:
        out: list[tuple[str, object]] = [(p, getattr(self, p)) for p in PHASES]
        out += [("total", self.total), ("attempts", self.attempts), ("sum_mu", self.sum_mu)]
        if self.exact_join_size is not None:
            out.append(("exact_join_size", self.exact_join_size))
        out += [("memory_bytes", self.memory_bytes)]
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("key,value\n")
            for k, v in self.rows():
                fh.write(f"{k},{v:.6f}\n" if isinstance(v, float) else f"{k},{v}\n")

    @property
    def per_sample(self) -> float:
        return self.sampling / self.samples if self.samples else float("nan")


def _oracle_sample(R, S, hx, hy, t, rng):
    t0 = time.perf_counter()
    truth = brute_force_join(R, S, hx, hy)
    t1 = time.perf_counter()
    if truth.size == 0 or t == 0:
        e = np.empty(0, dtype=np.int64)
        return SampleBatch(e, e, e, e), truth, t1 - t0, 0.0
    pick = rng.generator.integers(0, truth.size, size=t)
    batch = SampleBatch(truth.r_index[pick], truth.s_index[pick], truth.r_ids[pick], truth.s_ids[pick], t)
    return batch, truth, t1 - t0, time.perf_counter() - t1


def run_algorithm(algo: str, R, S, hx: float, hy: float, t: int, seed: int = 0, capacity: Optional[int] = None,
                  with_exact: bool = False, max_rejections: Optional[int] = None) -> tuple[SampleBatch, BenchReport]:
    """Prepare ``algo`` on (R, S), draw ``t`` samples and time every phase.

    ``s_index`` in the returned batch refers to the algorithm's own storage
    order of S, so consumers should work with ``r_ids`` / ``s_ids``.
    """
    if algo not in ALGORITHMS:
        raise InvalidParameterError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
    if t < 0:
        raise InvalidParameterError("samples must be nonnegative")
    R = as_point_set(R)
    S = as_point_set(S)
    rng = RandomSource(seed)
    rep = BenchReport(algo)
    start = time.perf_counter()
    if algo == "bbst":
        st = build_structures(R, S, hx, hy, capacity)
        idx = build_counting_index(None, st)
        batch = sample_join(idx, st, t, rng, max_rejections)
        timings = {**st.timings, **idx.timings}
        rep.sum_mu = idx.sum_mu
        rep.memory_bytes = st.nbytes + idx.nbytes
    elif algo == "kds":
        st = kds_prepare(R, S, hx, hy)
        batch = kds_sample(st, t, rng)
        timings = st.timings
        rep.sum_mu = st.join_size
        rep.memory_bytes = st.nbytes
    elif algo == "kds-rejection":
        st = kdsr_prepare(R, S, hx, hy)
        batch = kdsr_sample(st, t, rng, max_rejections)
        timings = st.timings
        rep.sum_mu = st.sum_mu
        rep.memory_bytes = st.nbytes
    else:
        batch, truth, build, samp = _oracle_sample(R, S, hx, hy, t, rng)
        timings = {"upper_bound": build, "sampling": samp}
        rep.sum_mu = truth.size
        rep.memory_bytes = truth.r_ids.nbytes * 4
        rep.exact_join_size = truth.size
    rep.total = time.perf_counter() - start
    for p in PHASES:
        setattr(rep, p, float(timings.get(p, 0.0)))
    rep.attempts = int(batch.attempts)
    rep.samples = len(batch)
    if with_exact and rep.exact_join_size is None:
        if len(R) * len(S) > MAX_PAIRS:
            raise TooLargeError("instance too large for an exact join size")
        rep.exact_join_size = brute_force_join(R, S, hx, hy).size
    return batch, rep


# ---------------------------------------------------------------------------
# verify suite


@dataclass
class VerifyResult:
    name: str
    join_size: int
    tv: dict = field(default_factory=dict)  # algo -> TV distance
    tv_limit: float = 0.0
    p_values: dict = field(default_factory=dict)
    lag_flagged: dict = field(default_factory=dict)
    non_members: int = 0
    bound_violations: int = 0
    exact_max_error: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def violations(self) -> int:
        return self.non_members + self.bound_violations + len(self.failures)


def _exhaustive_error(st, idx, truth) -> float:
    """Largest deviation of any join pair's per-iteration probability from 1/sum_mu."""
    acc, _ = enumerate_outcomes(idx, st)
    if idx.empty:
        return 0.0 if truth.size == 0 else 1.0
    r_ids = np.array([st.r_points.ids[i] for i, _ in acc], dtype=np.int64)
    s_ids = np.array([st.grid.points.ids[j] for _, j in acc], dtype=np.int64)
    pos = pair_indices(truth, r_ids, s_ids, strict=False)
    if (pos < 0).any():
        return 1.0
    probs = np.zeros(truth.size)
    np.add.at(probs, pos, np.fromiter(acc.values(), dtype=np.float64, count=len(acc)))
    return float(np.abs(probs - 1.0 / idx.sum_mu).max())


def verify_instance(inst: Instance, draws: int = 100_000, seed: int = 0, algos: Sequence[str] = ALGORITHMS[:3],
                    alpha: float = 1e-3, exhaustive: Optional[bool] = None) -> VerifyResult:
    """Oracle, uniformity, independence and bound checks on one instance.

    The TV limit is ``max(0.02, q)`` with ``q`` the 0.999 quantile of the TV
    distance of truly uniform draws at the same |J| and draw count.  The
    chi-square and lag tests use ``alpha`` directly.
    """
    truth = brute_force_join(inst.R, inst.S, inst.hx, inst.hy)
    res = VerifyResult(inst.name, truth.size)
    st = build_structures(inst.R, inst.S, inst.hx, inst.hy, inst.capacity)
    idx = build_counting_index(None, st)
    b = check_bounds(st.r_points, st.grid.points, inst.hx, inst.hy, idx.mu_cells, st.capacity)
    res.bound_violations = b.violations
    if b.violations:
        res.failures.append(f"bounds: {b}")
    if exhaustive is None:
        exhaustive = truth.size <= 8
    if exhaustive:
        res.exact_max_error = _exhaustive_error(st, idx, truth)
        if res.exact_max_error > 1e-9:
            res.failures.append(f"exhaustive: max |p - 1/sum_mu| = {res.exact_max_error:.3g}")
    if truth.size == 0:
        return res
    res.tv_limit = max(0.02, null_tv_quantile(truth.size, draws, q=0.999, reps=2000, seed=seed))
    for k, algo in enumerate(algos):
        batch, _ = run_algorithm(algo, inst.R, inst.S, inst.hx, inst.hy, draws, seed=seed + 7919 * (k + 1),
                                 capacity=inst.capacity)
        pos = pair_indices(truth, batch.r_ids, batch.s_ids, strict=False)
        bad = int(np.count_nonzero(pos < 0))
        res.non_members += bad
        if bad:
            res.failures.append(f"{algo}: {bad} samples outside the join")
            continue
        u = uniformity_test(batch, truth)
        res.tv[algo] = u.tv_distance
        res.p_values[algo] = u.p_value
        if u.tv_distance > res.tv_limit:
            res.failures.append(f"{algo}: TV {u.tv_distance:.4f} > {res.tv_limit:.4f}")
        if u.p_value < alpha:
            res.failures.append(f"{algo}: chi-square p = {u.p_value:.2g}")
        lag = lag_independence_test(batch, truth, alpha=alpha)
        res.lag_flagged[algo] = lag.flagged
        if lag.flagged:
            res.failures.append(f"{algo}: lag-1 dependence (p = {lag.p_value:.2g})")
    return res


def verify_catalog(instances: Optional[Sequence[Instance]] = None, draws: int = 100_000, seed: int = 0,
                   alpha: float = 1e-3) -> list[VerifyResult]:
    """Run :func:`verify_instance` over the micro catalog (or ``instances``).

    ``alpha`` is split across instances so the whole run keeps a family-wise
    false-alarm rate of about ``alpha`` for the chi-square and lag tests.
    """
    instances = micro_catalog() if instances is None else list(instances)
    a = alpha / max(1, len(instances))
    return [verify_instance(inst, draws, seed + i, alpha=a) for i, inst in enumerate(instances)]
