"""Bucket-based binary search trees (BBSTs) for 2-sided counting and sampling.

A cell's x-sorted points are cut into buckets of ``capacity`` consecutive
points.  A BBST is a balanced BST over bucket x-keys (``min_x`` of each
bucket for the MIN tree, ``max_x`` for the MAX tree).  Each node holds

* the buckets whose key equals the node key (``eq`` lists), and
* every bucket of its subtree (``sub`` arrays),

each twice: once ordered by bucket ``min_y`` and once by bucket ``max_y``.
A 1-sided x-query decomposes into O(height) node lists/arrays whose bucket
sets are disjoint; a binary search on y in each of them counts the buckets
that may intersect a 2-sided corner region.

All trees of all cells, in both key variants, live in one :class:`Forest`
made of a handful of flat arrays: compiled code pays a reference-count
round trip per distinct array a helper touches, so the hot kernels see few
of them.  Eq lists and subtree arrays share the ``lb``/``ly`` storage, whose
rows are indexed by :data:`ROW_MIN` (ordered by ``min_y``) and
:data:`ROW_MAX` (ordered by ``max_y``).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from ._jit import lower_bound_row, njit, upper_bound_row
from .core import Point, PointSet, as_point_set
from .errors import EmptyInputError, InvalidParameterError
from .grid import Case

__all__ = [
    "KeyMode",
    "XDir",
    "YDir",
    "EntryKind",
    "Bucket",
    "BucketArrays",
    "Forest",
    "BBST",
    "BBSTNode",
    "BBSTIndex",
    "CanonicalEntry",
    "CORNER_QUERIES",
    "bucket_capacity",
    "make_buckets",
    "build_bbst",
    "build_index",
    "canonical_decompose",
    "count_entry",
    "count_corner",
    "resolve_corner",
    "sample_corner",
]

ROW_MIN = 0
ROW_MAX = 1

# columns of Forest.link
LEFT, RIGHT, EQ_LO, EQ_HI, SUB_LO, SUB_HI = range(6)
# columns of Forest.root / Forest.height
MIN_TREE = 0
MAX_TREE = 1


class KeyMode(Enum):
    MIN_X = "min"
    MAX_X = "max"


class XDir(Enum):
    AT_LEAST = "at_least"  # key >= x_bound, used with MAX_X trees
    AT_MOST = "at_most"  # key <= x_bound, used with MIN_X trees


class YDir(Enum):
    MAX_AT_LEAST = "max_at_least"  # bucket max_y >= y_bound
    MIN_AT_MOST = "min_at_most"  # bucket min_y <= y_bound


class EntryKind(Enum):
    EQ_LIST = "eq"
    CANONICAL_SUBTREE = "sub"


class CanonicalEntry(NamedTuple):
    node: int
    kind: EntryKind


class CornerQuery(NamedTuple):
    mode: KeyMode
    x_side: str  # Window attribute supplying the x bound
    x_dir: XDir
    y_side: str
    y_dir: YDir


CORNER_QUERIES = {
    Case.CORNER_SW: CornerQuery(KeyMode.MAX_X, "x_min", XDir.AT_LEAST, "y_min", YDir.MAX_AT_LEAST),
    Case.CORNER_NW: CornerQuery(KeyMode.MAX_X, "x_min", XDir.AT_LEAST, "y_max", YDir.MIN_AT_MOST),
    Case.CORNER_SE: CornerQuery(KeyMode.MIN_X, "x_max", XDir.AT_MOST, "y_min", YDir.MAX_AT_LEAST),
    Case.CORNER_NE: CornerQuery(KeyMode.MIN_X, "x_max", XDir.AT_MOST, "y_max", YDir.MIN_AT_MOST),
}


def bucket_capacity(m: int) -> int:
    """``max(1, ceil(log2 m))``, computed exactly on integers."""
    if m < 1:
        raise InvalidParameterError("m must be positive")
    return max(1, (m - 1).bit_length())


# ---------------------------------------------------------------------------
# buckets


@dataclass(frozen=True)
class Bucket:
    points: PointSet
    min_x: float
    max_x: float
    min_y: float
    max_y: float
    index: int

    def __len__(self):
        return len(self.points)

    def key(self, mode: KeyMode) -> float:
        return self.min_x if mode is KeyMode.MIN_X else self.max_x


class BucketArrays(NamedTuple):
    """Flat bucket table; ``lo``/``size`` index into the cell-grouped points."""

    lo: np.ndarray
    size: np.ndarray
    min_x: np.ndarray
    max_x: np.ndarray
    min_y: np.ndarray
    max_y: np.ndarray
    cell_lo: np.ndarray  # per-cell bucket range
    cell_hi: np.ndarray

    @property
    def nbytes(self) -> int:
        return sum(a.nbytes for a in self)


def _bucket_arrays(x, y, cell_lo, cell_hi, capacity) -> BucketArrays:
    counts = cell_hi - cell_lo
    nb = -(-counts // capacity)
    cell_bhi = np.cumsum(nb)
    cell_blo = cell_bhi - nb
    total = int(cell_bhi[-1]) if len(nb) else 0
    cell_of = np.repeat(np.arange(len(nb)), nb)
    rank = np.arange(total) - cell_blo[cell_of]
    lo = cell_lo[cell_of] + rank * capacity
    size = np.minimum(capacity, cell_hi[cell_of] - lo)
    if total:
        min_y = np.minimum.reduceat(y, lo)
        max_y = np.maximum.reduceat(y, lo)
    else:
        min_y = max_y = np.empty(0)
    return BucketArrays(
        lo.astype(np.int64),
        size.astype(np.int64),
        x[lo],
        x[lo + size - 1],
        min_y,
        max_y,
        cell_blo.astype(np.int64),
        cell_bhi.astype(np.int64),
    )


def make_buckets(points_x, capacity: int) -> list[Bucket]:
    """Cut x-sorted cell points into runs of ``capacity`` with exact summaries."""
    if capacity < 1:
        raise InvalidParameterError("capacity must be >= 1")
    pts = as_point_set(points_x)
    if len(pts) == 0:
        raise EmptyInputError("no points to bucket")
    if not pts.is_x_sorted():
        raise InvalidParameterError("points must be sorted ascending by x")
    ba = _bucket_arrays(pts.x, pts.y, np.array([0]), np.array([len(pts)]), capacity)
    return [
        Bucket(
            pts.take(np.arange(ba.lo[i], ba.lo[i] + ba.size[i])),
            float(ba.min_x[i]),
            float(ba.max_x[i]),
            float(ba.min_y[i]),
            float(ba.max_y[i]),
            i,
        )
        for i in range(len(ba.lo))
    ]


# ---------------------------------------------------------------------------
# forest construction


class Forest(NamedTuple):
    key: np.ndarray  # (n_nodes,) node x-keys
    link: np.ndarray  # (n_nodes, 6): LEFT, RIGHT, EQ_LO, EQ_HI, SUB_LO, SUB_HI
    lb: np.ndarray  # (2, n_refs) bucket ids of all eq lists and subtree arrays
    ly: np.ndarray  # (2, n_refs) matching min_y / max_y
    root: np.ndarray  # (n_cells, 2) by MIN_TREE / MAX_TREE
    height: np.ndarray  # (n_cells, 2) number of levels
    bucket: np.ndarray  # (n_buckets, 2) first point index and size

    @property
    def n_nodes(self) -> int:
        return len(self.key)

    # column views for Python-side inspection
    @property
    def left(self):
        return self.link[:, LEFT]

    @property
    def right(self):
        return self.link[:, RIGHT]

    @property
    def eq_lo(self):
        return self.link[:, EQ_LO]

    @property
    def eq_hi(self):
        return self.link[:, EQ_HI]

    @property
    def sub_lo(self):
        return self.link[:, SUB_LO]

    @property
    def sub_hi(self):
        return self.link[:, SUB_HI]

    @property
    def nbytes(self) -> int:
        return sum(a.nbytes for a in self)


@njit
def _levels_bound(n):
    # floor(log2 n) + 1
    d = 0
    while n > 0:
        n >>= 1
        d += 1
    return d


@njit
def _build_forest(cell_blo, cell_bhi, bkey, b_miny, b_maxy, cp_min, cp_max):
    nb_total = bkey.shape[0]
    ncell = cell_blo.shape[0]
    sub_cap = 0
    for c in range(ncell):
        nbc = cell_bhi[c] - cell_blo[c]
        sub_cap += nbc * _levels_bound(nbc)

    key = np.empty(nb_total, dtype=np.float64)
    left = np.full(nb_total, -1, dtype=np.int64)
    right = np.full(nb_total, -1, dtype=np.int64)
    eq_lo = np.empty(nb_total, dtype=np.int64)
    eq_hi = np.empty(nb_total, dtype=np.int64)
    sub_lo = np.empty(nb_total, dtype=np.int64)
    sub_hi = np.empty(nb_total, dtype=np.int64)
    eq_b = np.empty((2, nb_total), dtype=np.int64)
    eq_y = np.empty((2, nb_total), dtype=np.float64)
    sub_b = np.empty((2, sub_cap), dtype=np.int64)
    sub_y = np.empty((2, sub_cap), dtype=np.float64)
    root = np.full(ncell, -1, dtype=np.int64)
    height = np.zeros(ncell, dtype=np.int64)

    # work[row, lo:hi] is the y-ordered copy of the bucket range [lo, hi)
    work = np.empty((2, nb_total), dtype=np.int64)
    work[0, :] = cp_min
    work[1, :] = cp_max
    tmp = np.empty(nb_total, dtype=np.int64)
    st_lo = np.empty(nb_total + 1, dtype=np.int64)
    st_hi = np.empty(nb_total + 1, dtype=np.int64)
    st_par = np.empty(nb_total + 1, dtype=np.int64)
    st_side = np.empty(nb_total + 1, dtype=np.int64)
    st_dep = np.empty(nb_total + 1, dtype=np.int64)

    nn = 0
    ne = 0
    ns = 0
    for c in range(ncell):
        if cell_bhi[c] == cell_blo[c]:
            continue
        sp = 0
        st_lo[0] = cell_blo[c]
        st_hi[0] = cell_bhi[c]
        st_par[0] = -1
        st_side[0] = 0
        st_dep[0] = 1
        sp = 1
        while sp > 0:
            sp -= 1
            lo = st_lo[sp]
            hi = st_hi[sp]
            par = st_par[sp]
            dep = st_dep[sp]
            node = nn
            nn += 1
            if par < 0:
                root[c] = node
            elif st_side[sp] == 0:
                left[par] = node
            else:
                right[par] = node
            if dep > height[c]:
                height[c] = dep
            # bucket ids are in key order inside a cell: median is positional
            k = bkey[(lo + hi - 1) // 2]
            key[node] = k
            i = lo
            while bkey[i] < k:
                i += 1
            j = i
            while j < hi and bkey[j] == k:
                j += 1
            sub_lo[node] = ns
            sub_hi[node] = ns + (hi - lo)
            eq_lo[node] = ne
            eq_hi[node] = ne + (j - i)
            for row in range(2):
                yv = b_miny if row == 0 else b_maxy
                for p in range(lo, hi):
                    b = work[row, p]
                    sub_b[row, ns + p - lo] = b
                    sub_y[row, ns + p - lo] = yv[b]
                # order-preserving three-way split by key class
                a = lo
                e = i
                r = j
                for p in range(lo, hi):
                    b = work[row, p]
                    if b < i:
                        tmp[a] = b
                        a += 1
                    elif b < j:
                        tmp[e] = b
                        e += 1
                    else:
                        tmp[r] = b
                        r += 1
                for p in range(lo, hi):
                    work[row, p] = tmp[p]
                for p in range(i, j):
                    b = work[row, p]
                    eq_b[row, ne + p - i] = b
                    eq_y[row, ne + p - i] = yv[b]
            ns += hi - lo
            ne += j - i
            if j < hi:
                st_lo[sp] = j
                st_hi[sp] = hi
                st_par[sp] = node
                st_side[sp] = 1
                st_dep[sp] = dep + 1
                sp += 1
            if i > lo:
                st_lo[sp] = lo
                st_hi[sp] = i
                st_par[sp] = node
                st_side[sp] = 0
                st_dep[sp] = dep + 1
                sp += 1
    return (
        key[:nn].copy(),
        left[:nn].copy(),
        right[:nn].copy(),
        eq_lo[:nn].copy(),
        eq_hi[:nn].copy(),
        sub_lo[:nn].copy(),
        sub_hi[:nn].copy(),
        eq_b,
        eq_y,
        sub_b[:, :ns].copy(),
        sub_y[:, :ns].copy(),
        root,
        height,
    )


def _y_orders(ba: BucketArrays):
    n = len(ba.lo)
    cell_of = np.repeat(np.arange(len(ba.cell_lo)), ba.cell_hi - ba.cell_lo)
    ids = np.arange(n)
    cp_min = np.lexsort((ids, ba.min_y, cell_of)).astype(np.int64)
    cp_max = np.lexsort((ids, ba.max_y, cell_of)).astype(np.int64)
    return cp_min, cp_max


def _forest(ba: BucketArrays) -> Forest:
    """Build the MIN and MAX trees of every cell and pack them together."""
    cp_min, cp_max = _y_orders(ba)
    keys, links, lbs, lys, roots, heights = [], [], [], [], [], []
    n_off = 0
    l_off = 0
    for bkey in (ba.min_x, ba.max_x):
        key, left, right, eq_lo, eq_hi, sub_lo, sub_hi, eq_b, eq_y, sub_b, sub_y, root, height = _build_forest(
            ba.cell_lo, ba.cell_hi, bkey, ba.min_y, ba.max_y, cp_min, cp_max
        )
        shift = lambda a: np.where(a >= 0, a + n_off, -1)
        ns = sub_b.shape[1]
        link = np.stack(
            [shift(left), shift(right), eq_lo + l_off + ns, eq_hi + l_off + ns, sub_lo + l_off, sub_hi + l_off], axis=1
        )
        keys.append(key)
        links.append(link)
        lbs.append(np.concatenate([sub_b, eq_b], axis=1))
        lys.append(np.concatenate([sub_y, eq_y], axis=1))
        roots.append(shift(root))
        heights.append(height)
        n_off += len(key)
        l_off += lbs[-1].shape[1]
    return Forest(
        np.concatenate(keys),
        np.ascontiguousarray(np.concatenate(links).astype(np.int64)),
        np.ascontiguousarray(np.concatenate(lbs, axis=1)),
        np.ascontiguousarray(np.concatenate(lys, axis=1)),
        np.ascontiguousarray(np.stack(roots, axis=1).astype(np.int64)),
        np.ascontiguousarray(np.stack(heights, axis=1).astype(np.int64)),
        np.ascontiguousarray(np.stack([ba.lo, ba.size], axis=1).astype(np.int64)),
    )


# ---------------------------------------------------------------------------
# queries (shared by the Python API and the compiled samplers)


@njit(inline=True)
def entry_range(f, node, is_sub, yb, max_at_least):
    """Row and ``[start, stop)`` of the qualifying buckets of one entry."""
    if is_sub:
        lo = f.link[node, SUB_LO]
        hi = f.link[node, SUB_HI]
    else:
        lo = f.link[node, EQ_LO]
        hi = f.link[node, EQ_HI]
    if max_at_least:
        return 1, lower_bound_row(f.ly, 1, lo, hi, yb), hi
    return 0, lo, upper_bound_row(f.ly, 0, lo, hi, yb)


@njit(inline=True)
def corner_walk(f, root, xb, at_least, yb, max_at_least, cap, offset):
    """Walk the canonical decomposition of a 2-sided query.

    Entries are visited root to leaf, each node's eq list before its
    canonical child.  With ``offset < 0`` returns ``(mu, -1, -1)`` where
    ``mu`` is ``cap`` times the number of qualifying buckets.  Otherwise
    ``offset`` in ``[0, mu)`` selects a (bucket, slot) unit and
    ``(mu_so_far, bucket, slot)`` is returned.
    """
    total = 0
    node = root
    while node != -1:
        k = f.key[node]
        if at_least:
            if k < xb:
                node = f.link[node, RIGHT]
                continue
            canon = f.link[node, RIGHT]
            nxt = f.link[node, LEFT]
        else:
            if k > xb:
                node = f.link[node, LEFT]
                continue
            canon = f.link[node, LEFT]
            nxt = f.link[node, RIGHT]
        row, a, b = entry_range(f, node, False, yb, max_at_least)
        cnt = (b - a) * cap
        if offset >= 0 and offset < total + cnt:
            pos = offset - total
            return total, f.lb[row, a + pos // cap], pos % cap
        total += cnt
        if canon != -1:
            row, a, b = entry_range(f, canon, True, yb, max_at_least)
            cnt = (b - a) * cap
            if offset >= 0 and offset < total + cnt:
                pos = offset - total
                return total, f.lb[row, a + pos // cap], pos % cap
            total += cnt
        if k == xb:
            break
        node = nxt
    return total, -1, -1


@njit(inline=True)
def corner_point(f, root, xb, at_least, yb, max_at_least, cap, offset):
    """Point index for unit ``offset`` of a corner budget, -1 for a phantom slot."""
    _, b, slot = corner_walk(f, root, xb, at_least, yb, max_at_least, cap, offset)
    if b < 0 or slot >= f.bucket[b, 1]:
        return -1
    return f.bucket[b, 0] + slot


@njit
def _decompose(f, root, xb, at_least, out_node, out_sub):
    n = 0
    node = root
    while node != -1:
        k = f.key[node]
        if at_least:
            if k < xb:
                node = f.link[node, RIGHT]
                continue
            canon = f.link[node, RIGHT]
            nxt = f.link[node, LEFT]
        else:
            if k > xb:
                node = f.link[node, LEFT]
                continue
            canon = f.link[node, LEFT]
            nxt = f.link[node, RIGHT]
        out_node[n] = node
        out_sub[n] = False
        n += 1
        if canon != -1:
            out_node[n] = canon
            out_sub[n] = True
            n += 1
        if k == xb:
            break
        node = nxt
    return n


# ---------------------------------------------------------------------------
# Python-facing tree views


@dataclass
class BBSTNode:
    tree: "BBST"
    index: int

    @property
    def key_x(self) -> float:
        return float(self.tree.forest.key[self.index])

    def _ids(self, arr, lo, hi, row):
        return [int(b) - self.tree.bucket_base for b in arr[row, lo[self.index] : hi[self.index]]]

    @property
    def eq_min(self) -> list[int]:
        f = self.tree.forest
        return self._ids(f.lb, f.eq_lo, f.eq_hi, ROW_MIN)

    @property
    def eq_max(self) -> list[int]:
        f = self.tree.forest
        return self._ids(f.lb, f.eq_lo, f.eq_hi, ROW_MAX)

    @property
    def sub_min(self) -> list[int]:
        f = self.tree.forest
        return self._ids(f.lb, f.sub_lo, f.sub_hi, ROW_MIN)

    @property
    def sub_max(self) -> list[int]:
        f = self.tree.forest
        return self._ids(f.lb, f.sub_lo, f.sub_hi, ROW_MAX)

    def _child(self, arr) -> Optional["BBSTNode"]:
        c = int(arr[self.index])
        return None if c < 0 else BBSTNode(self.tree, c)

    @property
    def left(self) -> Optional["BBSTNode"]:
        return self._child(self.tree.forest.left)

    @property
    def right(self) -> Optional["BBSTNode"]:
        return self._child(self.tree.forest.right)


class BBST:
    """View of one cell's tree inside a :class:`Forest`.

    Bucket ids reported through :class:`BBSTNode` are cell-local
    (``0 .. n_buckets - 1`` in x order).
    """

    def __init__(self, forest: Forest, cell: int, key_mode: KeyMode, capacity: int, buckets: BucketArrays, points: PointSet):
        self.forest = forest
        self.cell = cell
        self.key_mode = key_mode
        self.capacity = capacity
        self.buckets = buckets
        self.points = points
        self.bucket_base = int(buckets.cell_lo[cell])
        self.n_buckets = int(buckets.cell_hi[cell]) - self.bucket_base
        self.column = MIN_TREE if key_mode is KeyMode.MIN_X else MAX_TREE

    @property
    def root_index(self) -> int:
        return int(self.forest.root[self.cell, self.column])

    @property
    def root(self) -> Optional[BBSTNode]:
        r = self.root_index
        return None if r < 0 else BBSTNode(self, r)

    @property
    def height(self) -> int:
        return int(self.forest.height[self.cell, self.column])

    def nodes(self) -> list[BBSTNode]:
        out, stack = [], [self.root] if self.root is not None else []
        while stack:
            nd = stack.pop()
            out.append(nd)
            stack.extend(c for c in (nd.right, nd.left) if c is not None)
        return out

    def bucket_key(self, local_id: int) -> float:
        arr = self.buckets.min_x if self.key_mode is KeyMode.MIN_X else self.buckets.max_x
        return float(arr[self.bucket_base + local_id])

    def subtree_refs(self) -> int:
        return sum(len(nd.sub_min) for nd in self.nodes())


def build_bbst(buckets: list[Bucket], key_mode: KeyMode = KeyMode.MIN_X, capacity: int | None = None) -> BBST:
    """Build one tree from a single cell's buckets (given in x order)."""
    if not buckets:
        raise EmptyInputError("no buckets")
    if capacity is None:
        capacity = max(len(b) for b in buckets)
    pts = PointSet(
        np.concatenate([b.points.ids for b in buckets]),
        np.concatenate([b.points.x for b in buckets]),
        np.concatenate([b.points.y for b in buckets]),
    )
    sizes = np.array([len(b) for b in buckets], dtype=np.int64)
    lo = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    ba = BucketArrays(
        lo,
        sizes,
        np.array([b.min_x for b in buckets]),
        np.array([b.max_x for b in buckets]),
        np.array([b.min_y for b in buckets]),
        np.array([b.max_y for b in buckets]),
        np.array([0], dtype=np.int64),
        np.array([len(buckets)], dtype=np.int64),
    )
    keys = ba.min_x if key_mode is KeyMode.MIN_X else ba.max_x
    if np.any(np.diff(keys) < 0):
        raise InvalidParameterError("buckets must be given in x order")
    return BBST(_forest(ba), 0, key_mode, capacity, ba, pts)


class BBSTIndex:
    """Bucket table plus the MIN and MAX trees of every cell of a grid."""

    def __init__(self, buckets: BucketArrays, forest: Forest, capacity: int, points: PointSet):
        self.buckets = buckets
        self.forest = forest
        self.capacity = capacity
        self.points = points

    def tree(self, cell: int, mode) -> BBST:
        mode = KeyMode(mode) if not isinstance(mode, KeyMode) else mode
        return BBST(self.forest, cell, mode, self.capacity, self.buckets, self.points)

    @property
    def nbytes(self) -> int:
        return self.buckets.nbytes + self.forest.nbytes


def build_index(grid, capacity: int) -> BBSTIndex:
    """Bucket every cell of ``grid`` and build both forests."""
    if capacity < 1:
        raise InvalidParameterError("capacity must be >= 1")
    pts = grid.points
    ba = _bucket_arrays(pts.x, pts.y, grid.cell_lo, grid.cell_hi, capacity)
    return BBSTIndex(ba, _forest(ba), capacity, pts)


# ---------------------------------------------------------------------------
# public query operations


def _check_pairing(t: BBST, x_dir: XDir):
    want = XDir.AT_LEAST if t.key_mode is KeyMode.MAX_X else XDir.AT_MOST
    if x_dir is not want:
        raise InvalidParameterError(f"{x_dir.name} queries need a {'MAX_X' if x_dir is XDir.AT_LEAST else 'MIN_X'} tree")


def canonical_decompose(t: BBST, x_bound: float, x_dir: XDir) -> list[CanonicalEntry]:
    _check_pairing(t, x_dir)
    cap = 2 * (t.height + 1)
    out_node = np.empty(cap, dtype=np.int64)
    out_sub = np.empty(cap, dtype=np.bool_)
    n = _decompose(t.forest, t.root_index, float(x_bound), x_dir is XDir.AT_LEAST, out_node, out_sub)
    return [
        CanonicalEntry(int(out_node[i]), EntryKind.CANONICAL_SUBTREE if out_sub[i] else EntryKind.EQ_LIST)
        for i in range(n)
    ]


def entry_buckets(t: BBST, entry: CanonicalEntry) -> list[int]:
    """Cell-local ids of all buckets referenced by a decomposition entry."""
    nd = BBSTNode(t, entry.node)
    return nd.sub_min if entry.kind is EntryKind.CANONICAL_SUBTREE else nd.eq_min


def count_entry(t: BBST, entry: CanonicalEntry, y_bound: float, y_dir: YDir) -> int:
    """Number of buckets in one entry passing the y predicate."""
    _, a, b = entry_range(
        t.forest, entry.node, entry.kind is EntryKind.CANONICAL_SUBTREE, float(y_bound), y_dir is YDir.MAX_AT_LEAST
    )
    return int(b - a)


def count_corner(t: BBST, x_bound: float, x_dir: XDir, y_bound: float, y_dir: YDir) -> int:
    """Upper bound on the points of the cell inside the 2-sided region."""
    _check_pairing(t, x_dir)
    total, _, _ = corner_walk(
        t.forest,
        t.root_index,
        float(x_bound),
        x_dir is XDir.AT_LEAST,
        float(y_bound),
        y_dir is YDir.MAX_AT_LEAST,
        t.capacity,
        -1,
    )
    return int(total)


def resolve_corner(t: BBST, x_bound: float, x_dir: XDir, y_bound: float, y_dir: YDir, offset: int) -> int:
    """Index into ``t.points`` selected by budget unit ``offset``; -1 if phantom."""
    return int(
        corner_point(
            t.forest,
            t.root_index,
            float(x_bound),
            x_dir is XDir.AT_LEAST,
            float(y_bound),
            y_dir is YDir.MAX_AT_LEAST,
            t.capacity,
            int(offset),
        )
    )


def sample_corner(t: BBST, x_bound, x_dir: XDir, y_bound, y_dir: YDir, mu: int, rng) -> Optional[Point]:
    """Draw one budget unit uniformly from ``[0, mu)``.

    Every qualifying bucket owns ``capacity`` units, one per slot; units past
    the end of an underfull bucket yield ``None``.  Each counted point is
    therefore returned with probability exactly ``1 / mu``.
    """
    if __debug__:
        expect = count_corner(t, x_bound, x_dir, y_bound, y_dir)
        if mu != expect:
            raise InvalidParameterError(f"mu={mu} does not match the corner count {expect}")
    if mu < 1:
        raise InvalidParameterError("mu must be >= 1")
    i = resolve_corner(t, x_bound, x_dir, y_bound, y_dir, rng.uniform_int(0, mu - 1))
    return None if i < 0 else t.points[i]
