"""Cell-set container: adjacency, components, boundary, serialization."""

from fractions import Fraction as F

import pytest

from contfiber.cellset import (
    CellSet,
    RasterContinuum,
    boundary_cells,
    components,
    diameter,
    rasterize,
)
from contfiber.geometry import Box, CantorBand, ContinuumSpec, Probe
from contfiber.grid import make_grid


def grid(base=2, level=2, bbox=(0, 0, 1, 1)):
    return make_grid(base, level, bbox)


def full_square(level=2):
    g = grid(2, level)
    spec = ContinuumSpec("square", 2, (0, 0, 1, 1), (Box(0, 0, 1, 1),), ())
    return rasterize(spec, g)


def test_filled_square_boundary_and_interior():
    X = full_square(2)
    assert len(X.cells) == 16
    bd = boundary_cells(X)
    # outer ring of a 4x4 block
    assert len(bd.cells) == 12
    inner = X.interior()
    assert set(inner.cells_ij()) == {(1, 1), (1, 2), (2, 1), (2, 2)}


def test_boundary_includes_grid_edge():
    g = grid(2, 1)
    X = CellSet(g, {g.flat(0, 0)})
    # the lone cell touches the grid edge, so it is boundary
    assert boundary_cells(X).cells == X.cells


def test_components_split_and_order():
    g = grid(2, 2)
    a, b = g.flat(0, 0), g.flat(3, 3)
    X = CellSet(g, {a, b})
    comps = components(X)
    assert [c.cells for c in comps] == [{a}, {b}]
    assert all(c.is_connected() for c in comps)


def test_diagonal_pair_connectivity_modes():
    g = grid(2, 2)
    cells = {g.flat(0, 0), g.flat(1, 1)}
    assert CellSet(g, cells, connectivity=8).is_connected()
    assert not CellSet(g, cells, connectivity=4).is_connected()


def test_component_of_returns_containing_piece():
    g = grid(2, 2)
    X = CellSet(g, {g.flat(0, 0), g.flat(0, 1), g.flat(3, 3)})
    piece = X.component_of(g.flat(0, 1))
    assert piece.cells == {g.flat(0, 0), g.flat(0, 1)}


def test_diameter_values():
    g = grid(2, 2)
    h = F(1, 4)
    one = CellSet(g, {g.flat(1, 1)})
    assert diameter(one) == 0.0
    two = CellSet(g, {g.flat(1, 1), g.flat(2, 1)})
    assert two.diameter_sq() == h * h
    X = full_square(2)
    # farthest cell centers sit (1-h) apart on both axes
    assert X.diameter_sq() == 2 * (1 - h) ** 2


def test_set_algebra_and_grid_check():
    g = grid(2, 2)
    A = CellSet(g, {g.flat(0, 0), g.flat(1, 0)})
    B = CellSet(g, {g.flat(1, 0), g.flat(2, 0)})
    assert A.union(B).cells == {g.flat(0, 0), g.flat(1, 0), g.flat(2, 0)}
    assert A.intersection(B).cells == {g.flat(1, 0)}
    assert A.difference(B).cells == {g.flat(0, 0)}
    other = grid(2, 3)
    with pytest.raises(ValueError):
        A.union(CellSet(other, {other.flat(0, 0)}))


def test_runs_round_trip():
    X = full_square(3)
    Y = CellSet.from_runs(X.grid, X.to_runs())
    assert Y == X
    empty = CellSet(X.grid, ())
    assert CellSet.from_runs(X.grid, empty.to_runs()) == empty


def test_from_runs_validates():
    g = grid(2, 2)
    with pytest.raises(ValueError):
        CellSet.from_runs(g, [[[0, 5]], [], [], []])


def test_pgm_shape():
    X = full_square(2)
    data = X.to_pgm()
    assert data.startswith(b"P5\n4 4\n255\n")
    assert len(data) == len(b"P5\n4 4\n255\n") + 16


def test_snap_and_contains_point():
    g = grid(2, 2)
    X = CellSet(g, {g.flat(0, 0), g.flat(0, 1)})
    assert X.snap((F(0), F(0))) == (0, 0)
    assert X.contains_point((F(0), F(1, 2)))
    with pytest.raises(ValueError):
        X.snap((F(1), F(1)))


def test_csr_matches_neighbors():
    g = grid(2, 2)
    X = CellSet(g, {g.flat(0, 0), g.flat(1, 0), g.flat(1, 1)})
    indptr, indices = X.csr()
    assert indptr[-1] == len(indices)
    # all three cells are mutually 8-adjacent
    assert list(indptr) == [0, 2, 4, 6]


def test_rasterize_rejects_wrong_frame():
    spec = ContinuumSpec("square", 2, (0, 0, 1, 1), (Box(0, 0, 1, 1),), ())
    with pytest.raises(ValueError):
        rasterize(spec, grid(3, 2))
    with pytest.raises(ValueError):
        rasterize(spec, make_grid(2, 2, (0, 0, 2, 2)))


def test_raster_continuum_caches_levels():
    spec = ContinuumSpec(
        "band", 3, (0, 0, 1, 1),
        (CantorBand(0, F(0), F(1), F(0), F(1)),),
        (Probe("corner", (F(0), F(0)), "generic"),),
        connected=False,
    )
    rc = RasterContinuum(spec)
    assert rc.at_level(2) is rc.at_level(2)
    assert rc.probe_cell(rc.probes["corner"], 2) == (0, 0)
    assert len(components(rc.at_level(2))) == 4


def test_refinement_nesting():
    spec = ContinuumSpec(
        "band", 3, (0, 0, 1, 1), (CantorBand(0, F(0), F(1), F(0), F(1)),), (),
        connected=False,
    )
    rc = RasterContinuum(spec)
    coarse, fine = rc.at_level(2), rc.at_level(3)
    # every fine cell refines an occupied coarse cell, and conversely
    parents = {fine.grid.ancestor_of(i, j, coarse.grid) for (i, j) in fine.cells_ij()}
    assert parents == set(coarse.cells_ij())
