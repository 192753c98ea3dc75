from fractions import Fraction as F

import pytest

from contfiber.grid import GridSpec, make_grid

UNIT = (F(0), F(0), F(1), F(1))


def g(base, level, bbox=UNIT):
    return GridSpec(base, level, bbox)


def test_basic_properties():
    grid = g(3, 2)
    assert grid.size == 9
    assert grid.h == F(1, 9)
    assert grid.with_level(4).size == 81
    assert grid.with_level(4).bbox == grid.bbox


def test_make_grid_accepts_ints_and_strings():
    grid = make_grid(2, 3, (0, 0, "1", 1))
    assert grid.h == F(1, 8)


def test_floats_rejected():
    with pytest.raises(TypeError):
        GridSpec(2, 1, (0.0, 0, 1, 1))


def test_bad_base_and_bbox_rejected():
    with pytest.raises(ValueError):
        GridSpec(5, 1, UNIT)
    with pytest.raises(ValueError):
        GridSpec(2, 1, (0, 0, 2, 1))  # not square
    with pytest.raises(ValueError):
        GridSpec(2, 1, (1, 0, 1, 0))  # empty
    with pytest.raises(ValueError):
        GridSpec(2, -1, UNIT)


def test_flat_unflat_roundtrip():
    grid = g(2, 3)
    for j in range(8):
        for i in range(8):
            assert grid.unflat(grid.flat(i, j)) == (i, j)


def test_cell_box_tiles_the_bbox():
    grid = g(2, 2)
    x0, y0, x1, y1 = grid.cell_box(0, 0)
    assert (x0, y0) == (F(0), F(0))
    assert x1 - x0 == grid.h and y1 - y0 == grid.h
    assert grid.cell_box(3, 3)[2:] == (F(1), F(1))


def test_axis_cells_positive_overlap():
    grid = g(2, 2)  # cells of width 1/4
    assert list(grid.axis_cells(F(1, 4), F(3, 4), 0)) == [1, 2]
    assert list(grid.axis_cells(F(0), F(1), 0)) == [0, 1, 2, 3]
    # interval reaching just past a gridline claims the next cell
    assert list(grid.axis_cells(F(1, 4), F(13, 16), 0)) == [1, 2, 3]


def test_axis_cells_degenerate_on_gridline_goes_below():
    grid = g(2, 2)
    assert list(grid.axis_cells(F(1, 2), F(1, 2), 0)) == [1]
    assert list(grid.axis_cells(F(1, 4), F(1, 4), 0)) == [0]
    # bbox edges clamp inward
    assert list(grid.axis_cells(F(0), F(0), 0)) == [0]
    assert list(grid.axis_cells(F(1), F(1), 0)) == [3]


def test_axis_cells_degenerate_off_gridline():
    grid = g(2, 2)
    assert list(grid.axis_cells(F(1, 3), F(1, 3), 0)) == [1]


def test_axis_cells_outside_bbox():
    grid = g(2, 2)
    assert list(grid.axis_cells(F(2), F(3), 0)) == []
    assert list(grid.axis_cells(F(-2), F(-1), 0)) == []
    # overlapping interval clamps
    assert list(grid.axis_cells(F(-1), F(1, 8), 0)) == [0]


def test_axis_cells_swapped_endpoints():
    grid = g(2, 2)
    assert list(grid.axis_cells(F(3, 4), F(1, 4), 0)) == [1, 2]


def test_cells_containing_interior_point():
    grid = g(2, 2)
    assert grid.cells_containing((F(1, 8), F(1, 8))) == [(0, 0)]


def test_cells_containing_gridline_and_corner():
    grid = g(2, 2)
    # on a vertical gridline: two cells
    assert grid.cells_containing((F(1, 2), F(1, 8))) == [(1, 0), (2, 0)]
    # on an interior corner: four cells
    got = grid.cells_containing((F(1, 2), F(1, 2)))
    assert got == [(1, 1), (2, 1), (1, 2), (2, 2)]
    # bbox corner: one cell
    assert grid.cells_containing((F(0), F(0))) == [(0, 0)]
    assert grid.cells_containing((F(1), F(1))) == [(3, 3)]


def test_cells_containing_outside():
    grid = g(2, 2)
    assert grid.cells_containing((F(2), F(0))) == []


def test_snap_prefers_lex_min_member():
    grid = g(2, 2)
    raster = frozenset({grid.flat(2, 2), grid.flat(2, 1)})
    # corner point (1/2, 1/2) touches four cells; only two are in the raster
    assert grid.snap((F(1, 2), F(1, 2)), raster) == (2, 1)


def test_snap_misses_raise():
    grid = g(2, 2)
    with pytest.raises(ValueError):
        grid.snap((F(1, 8), F(1, 8)), frozenset({grid.flat(3, 3)}))


def test_ancestor_and_children():
    coarse = g(3, 1)
    fine = g(3, 2)
    assert coarse.child_factor(fine) == 3
    for i in range(9):
        for j in range(9):
            ci, cj = fine.ancestor_of(i, j, coarse)
            assert (i, j) in set(coarse.children_of(ci, cj, fine))


def test_child_factor_rejects_mismatch():
    with pytest.raises(ValueError):
        g(2, 1).child_factor(g(3, 2))
    with pytest.raises(ValueError):
        g(2, 2).child_factor(g(2, 1))


def test_offset_bbox():
    grid = GridSpec(2, 1, (F(-2), F(-2), F(2), F(2)))
    assert grid.h == F(2)
    assert list(grid.axis_cells(F(0), F(0), 0)) == [0]  # tie goes left
    assert grid.cells_containing((F(0), F(0))) == [(0, 0), (1, 0), (0, 1), (1, 1)]
