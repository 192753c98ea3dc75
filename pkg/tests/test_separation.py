"""Separation queries: exact cut values, Menger witnesses, brute oracle."""

import random
from fractions import Fraction as F

import pytest

from contfiber.cellset import CellSet, rasterize
from contfiber.generators import gen_example
from contfiber.geometry import Box, ContinuumSpec
from contfiber.grid import make_grid
from contfiber.separation import (
    NOT_SEPARABLE,
    SEPARABLE,
    brute_force_min_cut,
    min_boundary_cut,
    quasi_component,
)


def strip(length, level=3):
    g = make_grid(2, level, (0, 0, 1, 1))
    cells = {g.flat(i, 0) for i in range(length)}
    return g, CellSet(g, cells)


def square(level=2):
    g = make_grid(2, level, (0, 0, 1, 1))
    spec = ContinuumSpec("square", 2, (0, 0, 1, 1), (Box(0, 0, 1, 1),), ())
    return g, rasterize(spec, g)


def check_separable_witness(X, r):
    assert r.status == SEPARABLE
    assert r.value == len(r.cut) == len(r.paths)
    # paths are internally vertex-disjoint
    seen = set()
    for p in r.paths:
        inner = set(p[1:-1])
        assert not (inner & seen)
        seen |= inner
    # removing the cut really disconnects the endpoints
    if r.paths:
        src, dst = r.paths[0][0], r.paths[0][-1]
        G = X.boundary() if r.separate_in == "boundary" else X
        rest = G.difference(r.cut)
        assert dst not in rest.component_of(src).cells


def test_strip_cut_is_one():
    g, X = strip(6)
    r = min_boundary_cut(X, (0, 0), (5, 0), k_max=3)
    assert r.status == SEPARABLE and r.value == 1
    check_separable_witness(X, r)
    # the canonical cut sits on the source side
    assert r.cut == (g.flat(1, 0),)


def test_ring_cut_is_two():
    g, X = square(2)
    r = min_boundary_cut(X, (0, 0), (3, 3), k_max=3)
    assert r.value == 2
    check_separable_witness(X, r)


def test_full_mode_interior_corridor_blocks_cut():
    # in the full graph the interior cannot be removed, so the endpoints
    # stay connected through it
    g, X = square(3)
    r = min_boundary_cut(X, (0, 0), (7, 7), k_max=3, separate_in="full")
    assert r.status == NOT_SEPARABLE
    assert len(r.paths) == 4


def test_interior_probe_flagged():
    g, X = square(2)
    r = min_boundary_cut(X, (1, 1), (0, 0), k_max=2)
    assert r.status == SEPARABLE and r.value == 0 and r.interior


def test_adjacent_cells_not_separable():
    g, X = strip(4)
    r = min_boundary_cut(X, (1, 0), (2, 0), k_max=2)
    assert r.status == NOT_SEPARABLE
    assert r.cut == ()
    assert len(r.paths) == 3
    assert all(p == (g.flat(1, 0), g.flat(2, 0)) for p in r.paths)


def test_disconnected_pair_costs_nothing():
    g = make_grid(2, 3, (0, 0, 1, 1))
    X = CellSet(g, {g.flat(0, 0), g.flat(5, 5)})
    r = min_boundary_cut(X, (0, 0), (5, 5), k_max=2)
    assert r.status == SEPARABLE and r.value == 0
    assert r.cut == () and r.paths == ()


def test_endpoint_validation():
    g, X = strip(4)
    with pytest.raises(ValueError):
        min_boundary_cut(X, (0, 0), (0, 0))
    with pytest.raises(ValueError):
        min_boundary_cut(X, (0, 0), (7, 7))
    with pytest.raises(ValueError):
        min_boundary_cut(X, (0, 0), (3, 0), separate_in="sideways")


def test_comb_prong_tops_cut_by_one_bar_cell():
    g = make_grid(3, 3, (0, 0, 1, 1))
    X, probes = gen_example("comb", g)
    a = X.snap(probes["top_0"].point)
    b = X.snap(probes["top_1"].point)
    r = min_boundary_cut(X, a, b, k_max=3)
    assert r.value == 1
    check_separable_witness(X, r)
    # the cut cell lies on the bar
    assert all(f // (3 ** 3) == 3 ** 3 - 1 for f in r.cut)


def test_k_max_monotone():
    g, X = square(2)
    r1 = min_boundary_cut(X, (0, 0), (3, 3), k_max=1)
    r3 = min_boundary_cut(X, (0, 0), (3, 3), k_max=3)
    assert r1.status == NOT_SEPARABLE and len(r1.paths) == 2
    assert r3.status == SEPARABLE


def test_symmetry_of_value():
    g = make_grid(3, 3, (0, 0, 1, 1))
    X, probes = gen_example("comb", g)
    a = X.snap(probes["top_0"].point)
    b = X.snap(probes["foot_1"].point)
    r1 = min_boundary_cut(X, a, b, k_max=4)
    r2 = min_boundary_cut(X, b, a, k_max=4)
    assert (r1.status, r1.value) == (r2.status, r2.value)


def test_determinism():
    g, X = square(3)
    rs = [min_boundary_cut(X, (0, 0), (7, 7), k_max=3) for _ in range(3)]
    assert all(r == rs[0] for r in rs)


def test_brute_matches_flow_on_hand_cases():
    g, X = strip(6)
    b = brute_force_min_cut(X, (0, 0), (5, 0), k_max=3)
    assert (b.status, b.value) == (SEPARABLE, 1)
    g, X = square(2)
    b = brute_force_min_cut(X, (0, 0), (3, 3), k_max=3)
    assert (b.status, b.value) == (SEPARABLE, 2)
    b = brute_force_min_cut(X, (0, 0), (0, 1), k_max=3)
    assert b.status == NOT_SEPARABLE


def test_brute_caps_enforced():
    g, X = square(2)
    with pytest.raises(ValueError):
        brute_force_min_cut(X, (0, 0), (3, 3), k_max=4)
    g5 = make_grid(2, 5, (0, 0, 1, 1))
    spec = ContinuumSpec("square", 2, (0, 0, 1, 1), (Box(0, 0, 1, 1),), ())
    big = rasterize(spec, g5)
    with pytest.raises(ValueError):
        brute_force_min_cut(big, (0, 0), (31, 31), k_max=2, separate_in="full")


def _random_crop_queries(n_queries, seed):
    rng = random.Random(seed)
    corpora = []
    for name, base, lvl, bbox in (
        ("comb", 3, 3, (0, 0, 1, 1)),
        ("broom", 2, 4, (0, 0, 1, 1)),
        ("example_N", 2, 4, (-2, -2, 2, 2)),
    ):
        X, _ = gen_example(name, make_grid(base, lvl, bbox))
        corpora.append(X)
    made = 0
    while made < n_queries:
        X = rng.choice(corpora)
        S = X.grid.size
        w = rng.randint(6, 20)
        i0 = rng.randint(0, max(0, S - w))
        j0 = rng.randint(0, max(0, S - w))
        cells = {f for f in X.cells
                 if i0 <= f % S < i0 + w and j0 <= f // S < j0 + w}
        if len(cells) < 4:
            continue
        crop = CellSet(X.grid, cells)
        pool = sorted(cells)
        x, y = rng.sample(pool, 2)
        yield crop, x, y, rng.randint(0, 3)
        made += 1


def test_brute_force_agrees_with_flow_on_random_crops():
    for crop, x, y, k in _random_crop_queries(60, seed=20240811):
        r = min_boundary_cut(crop, x, y, k_max=k)
        b = brute_force_min_cut(crop, x, y, k_max=k)
        assert (r.status, r.value) == (b.status, b.value), (x, y, k)


def test_quasi_component_of_strip_interior():
    g, X = strip(5)
    qc = quasi_component(X, (2, 0), k_max=2)
    # each neighbor is inseparable (adjacent), everything else cuts off
    assert qc.cells == {g.flat(1, 0), g.flat(2, 0), g.flat(3, 0)}
