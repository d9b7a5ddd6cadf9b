import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from srjsample import InvalidParameterError, RandomSource, build_bbst, canonical_decompose, make_buckets
from srjsample.bbst import (
    EntryKind,
    KeyMode,
    XDir,
    YDir,
    bucket_capacity,
    count_corner,
    entry_buckets,
    resolve_corner,
    sample_corner,
)

from conftest import make_points

# coordinates on a coarse lattice so that equal x values are common
cells = st.lists(
    st.tuples(st.integers(0, 12).map(lambda v: v / 4), st.integers(0, 12).map(lambda v: v / 4)),
    min_size=1,
    max_size=60,
)


def test_capacity_is_ceil_log2():
    assert [bucket_capacity(m) for m in (1, 2, 3, 4, 5, 8, 9, 10**6)] == [1, 1, 2, 2, 3, 3, 4, 20]
    with pytest.raises(InvalidParameterError):
        bucket_capacity(0)


@given(cells, st.integers(1, 5))
def test_buckets_cover_points_in_x_order(xy, cap):
    pts = make_points(xy).sorted_by_x()
    bs = make_buckets(pts, cap)
    assert [len(b) for b in bs[:-1]] == [cap] * (len(bs) - 1)
    assert 1 <= len(bs[-1]) <= cap
    assert np.concatenate([b.points.ids for b in bs]).tolist() == pts.ids.tolist()
    for b in bs:
        assert b.min_x == b.points.x.min() and b.max_x == b.points.x.max()
        assert b.min_y == b.points.y.min() and b.max_y == b.points.y.max()


def test_make_buckets_rejects_unsorted():
    with pytest.raises(InvalidParameterError):
        make_buckets(make_points([(1, 0), (0, 0)]), 2)


def _tree(xy, cap, mode):
    pts = make_points(xy).sorted_by_x()
    bs = make_buckets(pts, cap)
    return bs, build_bbst(bs, mode, cap)


@given(cells, st.integers(1, 4), st.sampled_from([KeyMode.MIN_X, KeyMode.MAX_X]))
def test_tree_structure(xy, cap, mode):
    bs, t = _tree(xy, cap, mode)
    n = len(bs)
    assert t.height <= int(np.ceil(np.log2(n + 1))) + 1
    seen = []
    for nd in t.nodes():
        # every bucket in an eq list has the node's key, and each appears once
        assert all(t.bucket_key(b) == nd.key_x for b in nd.eq_min)
        seen += nd.eq_min
        # subtree lists are the same set sorted two ways
        assert sorted(nd.sub_min) == sorted(nd.sub_max)
        assert [bs[b].min_y for b in nd.sub_min] == sorted(bs[b].min_y for b in nd.sub_min)
        assert [bs[b].max_y for b in nd.sub_max] == sorted(bs[b].max_y for b in nd.sub_max)
        # search-tree order on keys
        if nd.left is not None:
            assert all(t.bucket_key(b) < nd.key_x for b in nd.left.sub_min)
        if nd.right is not None:
            assert all(t.bucket_key(b) > nd.key_x for b in nd.right.sub_min)
    assert sorted(seen) == list(range(n))
    # root subtree is everything; total references are O(n log n)
    assert sorted(t.root.sub_min) == list(range(n))
    assert t.subtree_refs() <= n * (t.height + 1)


@given(cells, st.integers(1, 4), st.integers(-1, 13).map(lambda v: v / 4))
def test_canonical_decomposition_is_exact_partition(xy, cap, xb):
    for mode, xdir in ((KeyMode.MAX_X, XDir.AT_LEAST), (KeyMode.MIN_X, XDir.AT_MOST)):
        bs, t = _tree(xy, cap, mode)
        got = []
        for e in canonical_decompose(t, xb, xdir):
            got += entry_buckets(t, e)
        want = [i for i in range(len(bs)) if (t.bucket_key(i) >= xb if xdir is XDir.AT_LEAST else t.bucket_key(i) <= xb)]
        assert sorted(got) == want  # disjoint union
        assert len(canonical_decompose(t, xb, xdir)) <= 2 * (t.height + 1)


def _qualifies(b, xb, xdir, yb, ydir):
    key = b.max_x if xdir is XDir.AT_LEAST else b.min_x
    xok = key >= xb if xdir is XDir.AT_LEAST else key <= xb
    yok = b.max_y >= yb if ydir is YDir.MAX_AT_LEAST else b.min_y <= yb
    return xok and yok


corner_args = st.tuples(
    st.integers(-1, 13).map(lambda v: v / 4),
    st.sampled_from([XDir.AT_LEAST, XDir.AT_MOST]),
    st.integers(-1, 13).map(lambda v: v / 4),
    st.sampled_from([YDir.MAX_AT_LEAST, YDir.MIN_AT_MOST]),
)


@given(cells, st.integers(1, 4), corner_args)
def test_corner_count_and_resolution(xy, cap, q):
    xb, xdir, yb, ydir = q
    mode = KeyMode.MAX_X if xdir is XDir.AT_LEAST else KeyMode.MIN_X
    bs, t = _tree(xy, cap, mode)
    qual = [b for b in bs if _qualifies(b, xb, xdir, yb, ydir)]
    mu = count_corner(t, xb, xdir, yb, ydir)
    assert mu == cap * len(qual)
    # every budget unit maps to a distinct real point or a phantom
    hits = [resolve_corner(t, xb, xdir, yb, ydir, off) for off in range(mu)]
    real = [h for h in hits if h >= 0]
    assert len(real) == len(set(real)) == sum(len(b) for b in qual)
    want = [int(i) for b in qual for i in b.points.ids]
    assert sorted(t.points.ids[real].tolist()) == sorted(want)
    assert hits.count(-1) == sum(cap - len(b) for b in qual)


def test_pairing_of_tree_and_direction_enforced():
    _, t = _tree([(0, 0), (1, 1)], 1, KeyMode.MIN_X)
    with pytest.raises(InvalidParameterError):
        count_corner(t, 0.0, XDir.AT_LEAST, 0.0, YDir.MAX_AT_LEAST)


def test_sample_corner_underfull_bucket_yields_phantoms():
    # one bucket of 3 points, capacity 4: 3 real units and 1 phantom
    _, t = _tree([(0.1, 0.1), (0.2, 0.5), (0.3, 0.9)], 4, KeyMode.MIN_X)
    mu = count_corner(t, 1.0, XDir.AT_MOST, 0.0, YDir.MAX_AT_LEAST)
    assert mu == 4
    rng = RandomSource(0)
    got = [sample_corner(t, 1.0, XDir.AT_MOST, 0.0, YDir.MAX_AT_LEAST, mu, rng) for _ in range(4000)]
    none = sum(g is None for g in got)
    assert 800 < none < 1200
    with pytest.raises(InvalidParameterError):
        sample_corner(t, 1.0, XDir.AT_MOST, 0.0, YDir.MAX_AT_LEAST, 3, rng)


def test_eq_list_precedes_child_in_decomposition():
    # four buckets sharing one max_x key
    xy = [(1.0, v) for v in (0.1, 0.2, 0.3, 0.4)] + [(2.0, 0.5)]
    bs, t = _tree(xy, 1, KeyMode.MAX_X)
    entries = canonical_decompose(t, 1.0, XDir.AT_LEAST)
    kinds = [e.kind for e in entries]
    assert EntryKind.EQ_LIST in kinds
    assert sum(len(entry_buckets(t, e)) for e in entries) == 5
