import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from srjsample import (
    AliasTable,
    EmptyDistributionError,
    EmptyInputError,
    InvalidParameterError,
    Point,
    PointSet,
    RandomSource,
    Window,
    alias_build,
    alias_sample,
    window_of,
)
from srjsample.core import contains, rand_below
from srjsample._jit import njit


def test_window_is_closed_on_all_sides():
    w = window_of(Point(0, 2.0, 2.0), 2.0, 2.0)
    assert w == Window(0.0, 4.0, 0.0, 4.0)
    for p in [(0, 0), (4, 4), (0, 4), (4, 0), (2, 0), (4, 2)]:
        assert contains(w, p)
    assert not contains(w, (4.000001, 2))
    assert not contains(w, (2, -1e-12))


@pytest.mark.parametrize("hx,hy", [(0, 1), (1, -1), (float("inf"), 1), (float("nan"), 1)])
def test_window_rejects_bad_extents(hx, hy):
    with pytest.raises(InvalidParameterError):
        window_of((0.0, 0.0), hx, hy)


def test_inverted_window_rejected():
    with pytest.raises(InvalidParameterError):
        Window(1, 0, 0, 1)


def test_point_set_roundtrip_and_validation():
    ps = PointSet.from_points([Point(5, 1.0, 2.0), Point(3, 0.5, 0.0)])
    assert ps[0] == Point(5, 1.0, 2.0)
    assert list(ps.sorted_by_x().ids) == [3, 5]
    assert ps.has_unique_ids()
    with pytest.raises(InvalidParameterError):
        PointSet([1], [np.nan], [0.0])
    with pytest.raises(InvalidParameterError):
        PointSet([1, 2], [0.0], [0.0, 1.0])


def test_x_order_breaks_ties_by_id():
    ps = PointSet([9, 2, 4], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0])
    assert list(ps.sorted_by_x().ids) == [4, 2, 9]


def test_random_source_is_reproducible():
    a, b = RandomSource(42), RandomSource(42)
    assert [a.uniform_int(0, 9) for _ in range(20)] == [b.uniform_int(0, 9) for _ in range(20)]
    assert 0.0 <= a.uniform_unit() < 1.0


def test_spawned_streams_differ():
    kids = RandomSource(1).spawn(2)
    assert [kids[0].uniform_int(0, 10**9) for _ in range(3)] != [kids[1].uniform_int(0, 10**9) for _ in range(3)]


@given(st.lists(st.integers(min_value=0, max_value=50), min_size=1, max_size=40).filter(lambda w: sum(w) > 0))
def test_alias_table_distribution_is_exact(weights):
    t = alias_build(weights)
    w = np.asarray(weights, dtype=float)
    assert np.allclose(t.probabilities(), w / w.sum(), atol=1e-12, rtol=0)


def test_alias_zero_weights_never_drawn():
    t = alias_build([0, 3, 0, 1])
    rng = RandomSource(0)
    draws = {alias_sample(t, rng) for _ in range(2000)}
    assert draws <= {1, 3}


@pytest.mark.parametrize("weights", [[], [0, 0], [1, -1], [1, float("nan")]])
def test_alias_bad_weights(weights):
    with pytest.raises((EmptyDistributionError, EmptyInputError, InvalidParameterError)):
        alias_build(weights)


def test_alias_sample_frequencies():
    t = alias_build([1, 2, 3, 4])
    rng = RandomSource(3)
    counts = np.bincount([t.sample(rng) for _ in range(40000)], minlength=4) / 40000
    assert np.allclose(counts, [0.1, 0.2, 0.3, 0.4], atol=0.01)
    assert isinstance(t, AliasTable) and t.n == 4


@njit
def _rand_below_many(gen, n, k):
    out = np.empty(k, dtype=np.int64)
    for i in range(k):
        out[i] = rand_below(gen, n)
    return out


@pytest.mark.parametrize("n", [1, 2, 3, 7, 9, 1000])
def test_rand_below_range_and_uniformity(n):
    v = _rand_below_many(np.random.default_rng(n), n, 90000)
    assert v.min() >= 0 and v.max() < n
    if n <= 9:
        freq = np.bincount(v, minlength=n) / len(v)
        assert np.abs(freq - 1 / n).max() < 0.01


def test_rand_below_large_bound():
    n = 2**53 - 1
    v = _rand_below_many(np.random.default_rng(1), n, 1000)
    assert (v >= 0).all() and (v < n).all()
