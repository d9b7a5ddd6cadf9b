import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from srjsample import (
    InvalidParameterError,
    RandomSource,
    brute_force_join,
    kd_build,
    kd_range_count,
    kd_range_sample,
    kds_sample_join,
    kdsr_sample_join,
    window_of,
)
from srjsample.baselines import kd_decompose, kd_range_pick, kdsr_prepare
from srjsample.core import Window
from srjsample.oracle import exact_range_count, pair_indices

from conftest import make_points

pts = st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20)), min_size=1, max_size=60)
windows = st.tuples(st.integers(-2, 22), st.integers(0, 10), st.integers(-2, 22), st.integers(0, 10))


@given(pts, windows)
def test_kd_count_and_decomposition_match_brute_force(xy, wq):
    S = make_points(xy)
    t = kd_build(S)
    w = Window(wq[0], wq[0] + wq[1], wq[2], wq[2] + wq[3])
    n = exact_range_count(S, w)
    assert kd_range_count(t, w) == n
    d = kd_decompose(t, w)
    assert d.total == n
    picked = sorted(kd_range_pick(t, w, k) for k in range(n))
    inside = [i for i in range(len(S)) if w.contains(S[i])]
    assert picked == inside


def test_kd_range_pick_rejects_out_of_range():
    S = make_points([(0, 0), (1, 1)])
    t = kd_build(S)
    with pytest.raises(InvalidParameterError):
        kd_range_pick(t, Window(0, 1, 0, 1), 2)


def test_kd_range_sample_uniform_over_window():
    rng = np.random.default_rng(0)
    S = make_points(rng.uniform(0, 10, size=(200, 2)))
    t = kd_build(S)
    w = window_of((5.0, 5.0), 1.5, 1.5)
    n = exact_range_count(S, w)
    r = RandomSource(1)
    draws = [kd_range_sample(t, w, r) for _ in range(200 * n)]
    assert all(c == n for _, c in draws)
    counts = np.bincount([p.id for p, _ in draws], minlength=len(S))
    hit = counts[counts > 0]
    assert len(hit) == n and hit.min() > 120
    with pytest.raises(InvalidParameterError):
        kd_range_sample(t, window_of((100.0, 100.0), 1, 1), r)


@pytest.mark.parametrize("sampler", [kds_sample_join, kdsr_sample_join])
def test_join_samplers_members_and_coverage(uniform_small, sampler):
    R, S, hx, hy = uniform_small
    truth = brute_force_join(R, S, hx, hy)
    b = sampler(R, S, hx, hy, 40 * truth.size, RandomSource(3))
    pos = pair_indices(truth, b.r_ids, b.s_ids)
    assert np.bincount(pos, minlength=truth.size).min() > 5


def test_kds_never_rejects_and_kdsr_iterations(uniform_small):
    R, S, hx, hy = uniform_small
    truth = brute_force_join(R, S, hx, hy)
    b = kds_sample_join(R, S, hx, hy, 1000, RandomSource(0))
    assert b.attempts == 1000
    st8 = kdsr_prepare(R, S, hx, hy)
    assert (st8.mu >= np.bincount(truth.r_index, minlength=len(R))).all()
    b = kdsr_sample_join(R, S, hx, hy, 20000, RandomSource(0))
    assert abs(b.attempts / len(b) / (st8.sum_mu / truth.size) - 1) < 0.05


def test_empty_join_baselines():
    R, S = make_points([(0, 0)]), make_points([(9, 9)])
    assert len(kds_sample_join(R, S, 1, 1, 5, RandomSource(0))) == 0
    assert len(kdsr_sample_join(R, S, 1, 1, 5, RandomSource(0))) == 0
