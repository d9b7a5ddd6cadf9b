import numpy as np
import pytest

from srjsample import CorrectnessViolation, TooLargeError, brute_force_join, lag_independence_test, uniformity_test
from srjsample.core import Window
from srjsample.oracle import (
    check_bounds,
    exact_cell_count,
    exact_range_count,
    null_tv_quantile,
    pair_indices,
    tv_distance,
)
import srjsample.oracle as oracle

from conftest import make_points


def test_e1_join(e1):
    R, S, hx, hy = e1
    j = brute_force_join(R, S, hx, hy)
    assert [tuple(p) for p in j.pairs] == [(0, 10), (0, 11)]
    assert (0, 11) in j and (0, 12) not in j


def test_ranges_and_cells():
    S = make_points([(0.5, 0.5), (1.5, 0.5), (1.0, 1.0)])
    w = Window(0.5, 1.0, 0.0, 1.0)
    assert exact_range_count(S, w) == 2
    assert exact_cell_count(S, w, (0, 0), 1.0, 1.0) == 1
    assert exact_cell_count(S, w, (1, 1), 1.0, 1.0) == 1


def test_pair_indices_strict():
    j = brute_force_join(make_points([(0, 0)]), make_points([(0, 0), (1, 1)]), 1, 1)
    assert pair_indices(j, [0, 0], [1, 0]).tolist() == [1, 0]
    assert pair_indices(j, [3], [0], strict=False).tolist() == [-1]
    with pytest.raises(CorrectnessViolation):
        pair_indices(j, [0], [7])


def test_brute_force_guard(monkeypatch):
    monkeypatch.setattr(oracle, "MAX_PAIRS", 3)
    with pytest.raises(TooLargeError):
        brute_force_join(make_points([(0, 0)] * 2), make_points([(0, 0)] * 2), 1, 1)


def test_uniformity_accepts_uniform_and_rejects_skew():
    j = brute_force_join(make_points([(0, 0)]), make_points([(0, 0), (0.1, 0), (0.2, 0), (0.3, 0)]), 1, 1)
    rng = np.random.default_rng(0)
    pick = rng.integers(0, 4, size=20000)
    good = uniformity_test((j.r_ids[pick], j.s_ids[pick]), j)
    assert good.tv_distance < 0.02 and good.p_value > 1e-3
    skew = np.where(rng.random(20000) < 0.1, 0, pick)
    bad = uniformity_test((j.r_ids[skew], j.s_ids[skew]), j)
    assert bad.p_value < 1e-6


def test_tv_and_null_quantile():
    assert tv_distance(np.array([1, 1, 1, 1])) == 0.0
    assert tv_distance(np.array([4, 0, 0, 0])) == pytest.approx(0.75)
    q1 = null_tv_quantile(100, 1000, q=0.99, reps=300)
    q2 = null_tv_quantile(100, 100000, q=0.99, reps=300)
    assert q2 < q1


def test_lag_test_flags_periodic_stream():
    j = brute_force_join(make_points([(0, 0)]), make_points([(i / 10, 0) for i in range(8)]), 1, 1)
    rng = np.random.default_rng(1)
    iid = rng.integers(0, 8, size=20000)
    assert not lag_independence_test((j.r_ids[iid], j.s_ids[iid]), j).flagged
    cyc = np.arange(20000) % 8
    assert lag_independence_test((j.r_ids[cyc], j.s_ids[cyc]), j).flagged
    # degenerate stream: a single pair repeated while several exist
    one = np.zeros(100, dtype=int)
    assert lag_independence_test((j.r_ids[one], j.s_ids[one]), j).flagged


def test_check_bounds_detects_violations():
    R = make_points([(0.5, 0.5)])
    S = make_points([(0.5, 0.5), (0.6, 0.6)])
    mu = np.zeros((1, 9), dtype=np.int64)
    assert check_bounds(R, S, 1, 1, mu, 1).soundness_violations == 1
    mu[0, 4] = 2
    assert check_bounds(R, S, 1, 1, mu, 1).ok
    mu[0, 0] = 50
    assert check_bounds(R, S, 1, 1, mu, 1).tightness_violations == 1
