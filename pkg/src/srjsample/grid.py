"""Hash grid of non-empty cells over S.

Cells are ``cell_w x cell_h`` with ``cell_w = hx`` and ``cell_h = hy`` (half
the window extents), so any window centred at a point overlaps the 3x3
block of cells around the cell containing that point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple, Optional

import numpy as np

from ._jit import njit
from .core import PointSet, as_point_set
from .errors import InvalidParameterError

__all__ = [
    "Case",
    "CellKey",
    "Cell",
    "Grid",
    "Neighborhood",
    "SLOT_NAMES",
    "case_of",
    "cell_key",
    "grid_map",
    "neighborhood",
]

# Slot layout: slot = 3 * (dy + 1) + (dx + 1) for neighbour offset (dx, dy).
SLOT_NAMES = ("SW", "S", "SE", "W", "C", "E", "NW", "N", "NE")
CENTER_SLOT = 4

_KEY_LIMIT = 2**31 - 2
_KEY_BIAS = 2**31


class Case(IntEnum):
    FULL = 0
    EDGE_LEFT = 1
    EDGE_RIGHT = 2
    EDGE_DOWN = 3
    EDGE_UP = 4
    CORNER_SW = 5
    CORNER_NW = 6
    CORNER_SE = 7
    CORNER_NE = 8

    @property
    def sides(self) -> int:
        """Number of window sides that cut the cell (0, 1 or 2)."""
        if self is Case.FULL:
            return 0
        return 1 if self <= Case.EDGE_UP else 2


_SLOT_CASES = (
    Case.CORNER_SW,
    Case.EDGE_DOWN,
    Case.CORNER_SE,
    Case.EDGE_LEFT,
    Case.FULL,
    Case.EDGE_RIGHT,
    Case.CORNER_NW,
    Case.EDGE_UP,
    Case.CORNER_NE,
)
# Case code per slot, for the kernels.
SLOT_CASE_CODES = np.array([int(c) for c in _SLOT_CASES], dtype=np.int64)


def case_of(slot_index: int) -> Case:
    if not 0 <= slot_index <= 8:
        raise InvalidParameterError(f"slot index must be in 0..8, got {slot_index}")
    return _SLOT_CASES[slot_index]


class CellKey(NamedTuple):
    ix: int
    iy: int


def cell_key(x: float, y: float, cell_w: float, cell_h: float) -> CellKey:
    return CellKey(math.floor(x / cell_w), math.floor(y / cell_h))


@njit(inline=True)
def combine_key(ix, iy):
    return (ix << 32) + (iy + 2147483648)


@njit(inline=True)
def find_cell(keys, ix, iy):
    """Index of cell ``(ix, iy)`` in the sorted key array, or -1."""
    k = combine_key(ix, iy)
    i = np.searchsorted(keys, k)
    if i < keys.shape[0] and keys[i] == k:
        return i
    return -1


@njit
def neighbor_cells(keys, ix, iy, out):
    for dy in range(-1, 2):
        for dx in range(-1, 2):
            out[3 * (dy + 1) + (dx + 1)] = find_cell(keys, ix + dx, iy + dy)


@dataclass
class Cell:
    key: CellKey
    points_x: PointSet
    points_y: PointSet
    bbst_min: Optional[object] = None
    bbst_max: Optional[object] = None

    def __len__(self):
        return len(self.points_x)


@dataclass
class Neighborhood:
    center: CellKey
    slots: tuple  # 9 entries of Cell or None

    def present(self) -> dict:
        return {SLOT_NAMES[i]: c for i, c in enumerate(self.slots) if c is not None}


class Grid:
    """Non-empty cells of S, stored as flat arrays grouped by cell.

    ``points`` holds S reordered so that each cell's points are contiguous
    (``cell_lo[c]:cell_hi[c]``) and x-ascending within the cell.
    ``y_order`` holds, per cell and over the same range, indices into
    ``points`` in y-ascending order; ``y_sorted`` are the matching y values.
    Cells are addressed through ``keys``, a sorted array of packed
    ``(ix, iy)`` pairs.
    """

    def __init__(self, cell_w, cell_h, points, keys, cell_ix, cell_iy, cell_lo, cell_hi, y_order):
        self.cell_w = float(cell_w)
        self.cell_h = float(cell_h)
        self.points = points
        self.keys = keys
        self.cell_ix = cell_ix
        self.cell_iy = cell_iy
        self.cell_lo = cell_lo
        self.cell_hi = cell_hi
        self.y_order = y_order
        self.y_sorted = points.y[y_order]
        # set by sampler.build_structures
        self.bbst = None

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def n_cells(self) -> int:
        return len(self.keys)

    def __len__(self):
        return self.n_cells

    def __repr__(self):
        return f"Grid(m={self.m}, cells={self.n_cells}, cell={self.cell_w}x{self.cell_h})"

    def key_of(self, x: float, y: float) -> CellKey:
        return cell_key(x, y, self.cell_w, self.cell_h)

    def index_of(self, key) -> int:
        ix, iy = key
        if abs(ix) > _KEY_LIMIT or abs(iy) > _KEY_LIMIT:
            return -1
        return int(find_cell(self.keys, np.int64(ix), np.int64(iy)))

    def cell_keys(self) -> list[CellKey]:
        return [CellKey(int(a), int(b)) for a, b in zip(self.cell_ix, self.cell_iy)]

    def counts(self) -> np.ndarray:
        return self.cell_hi - self.cell_lo

    def cell_at(self, c: int) -> Cell:
        lo, hi = int(self.cell_lo[c]), int(self.cell_hi[c])
        cell = Cell(
            key=CellKey(int(self.cell_ix[c]), int(self.cell_iy[c])),
            points_x=self.points.take(np.arange(lo, hi)),
            points_y=self.points.take(self.y_order[lo:hi]),
        )
        if self.bbst is not None:
            cell.bbst_min = self.bbst.tree(c, "min")
            cell.bbst_max = self.bbst.tree(c, "max")
        return cell

    def cell(self, key) -> Optional[Cell]:
        c = self.index_of(key)
        return None if c < 0 else self.cell_at(c)

    @property
    def cells(self) -> dict:
        """All cells keyed by :class:`CellKey` (materialised on access)."""
        return {self.cell_keys()[c]: self.cell_at(c) for c in range(self.n_cells)}

    @property
    def nbytes(self) -> int:
        arrays = (self.keys, self.cell_ix, self.cell_iy, self.cell_lo, self.cell_hi, self.y_order, self.y_sorted)
        return self.points.nbytes + sum(a.nbytes for a in arrays)


def _check_extent(name, v):
    if not (math.isfinite(v) and v > 0):
        raise InvalidParameterError(f"{name} must be finite and positive, got {v}")


def grid_map(points, hx: float, hy: float) -> Grid:
    """Distribute x-sorted points into cells of size ``hx x hy``.

    Per-cell x-order is inherited from the input by a stable distribution;
    only the per-cell y-views are sorted here.
    """
    _check_extent("hx", hx)
    _check_extent("hy", hy)
    pts = as_point_set(points)
    if not pts.is_x_sorted():
        raise InvalidParameterError("points must be sorted ascending by x")
    ix = np.floor(pts.x / hx)
    iy = np.floor(pts.y / hy)
    if len(pts) and (np.abs(ix).max() > _KEY_LIMIT or np.abs(iy).max() > _KEY_LIMIT):
        raise InvalidParameterError("cell index overflow: extents too small for the coordinate range")
    ix = ix.astype(np.int64)
    iy = iy.astype(np.int64)
    packed = (ix << 32) + (iy + _KEY_BIAS)
    order = np.argsort(packed, kind="stable")
    packed = packed[order]
    grouped = pts.take(order)
    keys, lo, cnt = np.unique(packed, return_index=True, return_counts=True)
    lo = lo.astype(np.int64)
    hi = lo + cnt.astype(np.int64)
    cell_of_point = np.repeat(np.arange(len(keys)), cnt)
    y_order = np.lexsort((grouped.ids, grouped.y, cell_of_point)).astype(np.int64)
    first = lo
    return Grid(hx, hy, grouped, keys, ix[order][first], iy[order][first], lo, hi, y_order)


def neighborhood(g: Grid, r) -> Neighborhood:
    x, y = (r.x, r.y) if hasattr(r, "x") else (r[-2], r[-1])
    k = g.key_of(x, y)
    slots = []
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            slots.append(g.cell(CellKey(k.ix + dx, k.iy + dy)))
    return Neighborhood(k, tuple(slots))
