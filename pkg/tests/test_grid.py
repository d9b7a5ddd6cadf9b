import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from srjsample import InvalidParameterError, grid_map, neighborhood
from srjsample.grid import SLOT_NAMES, Case, CellKey, case_of, cell_key

from conftest import make_points

coords = st.lists(
    st.tuples(st.floats(-50, 50, allow_nan=False), st.floats(-50, 50, allow_nan=False)), min_size=1, max_size=80
)


def test_floor_convention_for_negative_and_boundary_coordinates():
    assert cell_key(-0.5, 0.0, 1.0, 1.0) == CellKey(-1, 0)
    assert cell_key(2.0, -2.0, 2.0, 2.0) == CellKey(1, -1)
    assert cell_key(1.999, 3.0, 2.0, 1.5) == CellKey(0, 2)


def test_slot_layout():
    assert SLOT_NAMES[4] == "C" and SLOT_NAMES[0] == "SW" and SLOT_NAMES[8] == "NE"
    assert case_of(4) is Case.FULL
    assert [case_of(i).sides for i in range(9)] == [2, 1, 2, 1, 0, 1, 2, 1, 2]
    with pytest.raises(InvalidParameterError):
        case_of(9)


@given(coords, st.floats(0.5, 20), st.floats(0.5, 20))
def test_grid_partitions_points(xy, hx, hy):
    S = make_points(xy).sorted_by_x()
    g = grid_map(S, hx, hy)
    assert g.m == len(S)
    assert sorted(g.points.ids) == sorted(S.ids)
    assert g.counts().sum() == len(S)
    for c in range(g.n_cells):
        lo, hi = g.cell_lo[c], g.cell_hi[c]
        xs, ys = g.points.x[lo:hi], g.points.y[lo:hi]
        assert (np.floor(xs / hx) == g.cell_ix[c]).all()
        assert (np.floor(ys / hy) == g.cell_iy[c]).all()
        assert (np.diff(xs) >= 0).all()
        assert (np.diff(g.y_sorted[lo:hi]) >= 0).all()
        assert sorted(g.y_order[lo:hi]) == list(range(lo, hi))
    # cells are unique and found by key
    assert len(set(g.cell_keys())) == g.n_cells
    for c, k in enumerate(g.cell_keys()):
        assert g.index_of(k) == c


def test_missing_cell_lookup():
    g = grid_map(make_points([(0.5, 0.5), (3.5, 0.5)]), 1.0, 1.0)
    assert g.index_of((1, 0)) == -1
    assert g.cell((1, 0)) is None
    assert g.index_of((2**40, 0)) == -1
    assert len(g.cell((3, 0))) == 1


def test_neighborhood_slots():
    S = make_points([(0.5, 0.5), (1.5, 1.5), (2.5, 2.5), (1.5, 0.2)]).sorted_by_x()
    g = grid_map(S, 1.0, 1.0)
    nb = neighborhood(g, (1.4, 1.6))
    assert nb.center == CellKey(1, 1)
    assert set(nb.present()) == {"SW", "C", "NE", "S"}


def test_grid_requires_x_sorted_and_positive_extents():
    with pytest.raises(InvalidParameterError):
        grid_map(make_points([(2, 0), (1, 0)]), 1.0, 1.0)
    for h in (0.0, -1.0, math.inf):
        with pytest.raises(InvalidParameterError):
            grid_map(make_points([(0, 0)]), h, 1.0)


def test_grid_key_overflow_guard():
    with pytest.raises(InvalidParameterError):
        grid_map(make_points([(0, 0), (1e12, 0)]), 1e-3, 1.0)
