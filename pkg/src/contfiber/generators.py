"""Bundled example continua.

Each example is an exact geometric spec plus a set of designated probe
points.  ``gen_example`` rasterizes one on a caller-supplied grid and is the
entry point the CLI and the test corpus share.  Infinite families carry
``feature_scale`` tags so rasterization keeps exactly the members whose
distance from the limit set is at least one cell.
"""

import re
from fractions import Fraction
from functools import lru_cache
from typing import List, Tuple

from contfiber.cellset import CellSet, RasterContinuum, rasterize
from contfiber.geometry import (
    Box,
    CantorBand,
    CantorCone,
    ContinuumSpec,
    Probe,
    ProbeSet,
    Segment,
)
from contfiber.grid import GridSpec

F = Fraction

# depth to which self-similar families are unrolled when building specs;
# covers rasterization up to level 8 at base 2 and 3
_UNROLL = 8

_TOWER_RE = re.compile(r"^comb_tower[_(](\d+)\)?$")
_TOWER_INF_RE = re.compile(r"^comb_tower_inf(?:[_(](\d+)\)?)?$")


def _flabel(prefix: str, t: Fraction) -> str:
    t = F(t)
    if t.denominator == 1:
        return f"{prefix}_{t.numerator}"
    return f"{prefix}_{t.numerator}_{t.denominator}"


@lru_cache(maxsize=None)
def comb_spec() -> ContinuumSpec:
    """Cantor set of vertical prongs joined by a top bar."""
    prims = (
        CantorBand(0, F(0), F(1), F(0), F(1)),
        Box(F(0), F(1), F(1), F(1)),
    )
    ts = (F(0), F(1, 3), F(2, 3), F(1))
    probes = tuple(
        Probe(_flabel("top", t), (t, F(1)), "prong_top") for t in ts
    ) + tuple(Probe(_flabel("foot", t), (t, F(0)), "prong_foot") for t in ts)
    return ContinuumSpec("comb", 3, (0, 0, 1, 1), prims, probes)


def _broom_prims(sx: int) -> List:
    """Spine plus bristle fans; sx = +1 or -1 mirrors across the y-axis."""
    prims = [Segment(F(0), F(0), F(sx), F(0))]
    for m in range(_UNROLL):
        foot = F(1, 2 ** m)
        tip_x = F(1, 2 ** (m + 1))
        for k in range(1, _UNROLL - m + 1):
            h = F(1, 2 ** (m + k))
            prims.append(
                Segment(sx * foot, F(0), sx * tip_x, h, feature_scale=h)
            )
    return prims


@lru_cache(maxsize=None)
def broom_spec() -> ContinuumSpec:
    """Spine [0,1] with bristle fans accumulating on [2^-m-1, 2^-m] pieces."""
    probes = (
        Probe("handle", (F(1), F(0)), "spine"),
        Probe("mid", (F(1, 2), F(0)), "spine"),
        Probe("origin", (F(0), F(0)), "limit"),
    )
    return ContinuumSpec(
        "broom", 2, (0, 0, 1, 1), tuple(_broom_prims(1)), probes
    )


@lru_cache(maxsize=None)
def double_broom_spec() -> ContinuumSpec:
    """Mirror-image pair of brooms sharing the origin."""
    prims = tuple(_broom_prims(1)) + tuple(_broom_prims(-1))
    probes = (
        Probe("right", (F(1), F(0)), "spine"),
        Probe("left", (F(-1), F(0)), "spine"),
        Probe("origin", (F(0), F(0)), "junction"),
    )
    return ContinuumSpec("double_broom", 2, (-1, 0, 1, 2), prims, probes)


@lru_cache(maxsize=None)
def teepee_spec() -> ContinuumSpec:
    """Cone over the Cantor set: legs from (c, 0) to a common apex."""
    prims = (CantorCone(F(1, 2), F(1), F(0), F(0), F(1)),)
    probes = (
        Probe("apex", (F(1, 2), F(1)), "apex"),
        Probe("foot_left", (F(0), F(0)), "foot"),
        Probe("foot_right", (F(1), F(0)), "foot"),
        Probe("midleg", (F(1, 4), F(1, 2)), "leg"),
    )
    return ContinuumSpec("teepee", 3, (0, 0, 1, 1), prims, probes)


# --- comb towers -----------------------------------------------------------
#
# The unit tower T1 is a vertical comb: columns over 1+K spanning y in
# [0, 2], joined by the bar [1,2] x {2}.  T2 adds the mirrored horizontal
# comb of rows [0,1] x (1+K).  The k-th example stacks scaled copies:
#   X_{2m}   = union of 2^-j T2 for j < m
#   X_{2m+1} = union of 2^-j T2 for j < m, plus 2^-m T1
# so consecutive examples differ by one more half-scale stage.


def _t1_prims() -> Tuple:
    return (
        CantorBand(0, F(1), F(1), F(0), F(2)),
        Box(F(1), F(2), F(2), F(2)),
    )


def _t2_prims() -> Tuple:
    return _t1_prims() + (CantorBand(1, F(1), F(1), F(0), F(1)),)


def _scaled(prims, j: int):
    s = F(1, 2 ** j)
    return tuple(p.transformed(s, s, F(0), F(0)) for p in prims)


def tower_stage_count(k: int) -> int:
    if k < 1:
        raise ValueError("tower index must be >= 1")
    return (k + 1) // 2


@lru_cache(maxsize=None)
def tower_spec(k: int) -> ContinuumSpec:
    if k < 1:
        raise ValueError("tower index must be >= 1")
    m = k // 2
    prims: Tuple = ()
    for j in range(m):
        prims += _scaled(_t2_prims(), j)
    if k % 2 == 1:
        prims += _scaled(_t1_prims(), m)
    probes: List[Probe] = []
    if k % 2 == 1:
        deep = (F(1, 2 ** m), F(0))
    else:
        deep = (F(1, 2 ** (m - 1)), F(2, 2 ** (m - 1)))
    probes.append(Probe("deep", deep, "deep"))
    n_tops = m + 1 if k % 2 == 1 else m
    for j in range(n_tops):
        pt = (F(1, 2 ** j), F(2, 2 ** j))
        if pt == deep:
            continue
        probes.append(Probe(f"junction_{j}", pt, "junction"))
    probes.append(Probe("bar_end", (F(2), F(2)), "bar_end"))
    return ContinuumSpec(
        f"comb_tower_{k}", 6, (0, 0, 2, 2), prims, tuple(probes)
    )


@lru_cache(maxsize=None)
def tower_inf_spec(depth: int = 10) -> ContinuumSpec:
    """Infinite tower truncated at `depth` stages, plus its limit point."""
    if depth < 1:
        raise ValueError("tower depth must be >= 1")
    prims: Tuple = (Box(F(0), F(0), F(0), F(0)),)
    for j in range(depth):
        prims += _scaled(_t2_prims(), j)
    probes = [Probe("origin", (F(0), F(0)), "origin")]
    for j in range(min(depth, 6)):
        probes.append(
            Probe(f"junction_{j}", (F(1, 2 ** j), F(2, 2 ** j)), "junction")
        )
    name = "comb_tower_inf" if depth == 10 else f"comb_tower_inf_{depth}"
    return ContinuumSpec(name, 6, (0, 0, 2, 2), prims, tuple(probes))


def tower_min_level(k: int) -> int:
    """Smallest base-6 level at which comb_tower_k fully resolves.

    The deepest copy has scale sigma; its first Cantor gap is sigma/3 and
    must span at least one cell (cell size 2 * 6^-n on the side-2 box).
    """
    m = k // 2
    sigma = F(1, 2 ** (m - 1)) if (k % 2 == 0 and m >= 1) else F(1, 2 ** m)
    n = 1
    while 6 ** n * sigma < 6:
        n += 1
    return n


# --- example N -------------------------------------------------------------
#
# A segment B = {0} x [0,1] encircled by polyline arcs.  Arc k consists of a
# vertical piece at x = 2^{2-k}, a V through (0, -2^{1-k}), and a chord
# rising back to c = (0, 1/2).  The arcs converge to B, which becomes the
# only nontrivial fiber.


@lru_cache(maxsize=None)
def example_n_spec(max_arcs: int = _UNROLL) -> ContinuumSpec:
    prims: List = [Segment(F(0), F(0), F(0), F(1))]
    for k in range(1, max_arcs + 1):
        xk = F(4, 2 ** k)
        yk = F(2, 2 ** k)
        prims += [
            Segment(xk, F(1), xk, F(0), feature_scale=xk),
            Segment(xk, F(0), F(0), -yk, feature_scale=xk),
            Segment(F(0), -yk, -xk, F(0), feature_scale=xk),
            Segment(-xk, F(0), F(0), F(1, 2), feature_scale=xk),
        ]
    probes = (
        Probe("a", (F(0), F(0)), "segment_end"),
        Probe("b", (F(0), F(1)), "segment_end"),
        Probe("c", (F(0), F(1, 2)), "junction"),
        Probe("arc1_corner", (F(2), F(0)), "arc"),
        Probe("arc1_top", (F(2), F(1)), "arc"),
    )
    return ContinuumSpec(
        "example_N", 2, (-2, -2, 2, 2), tuple(prims), probes
    )


# --- dispatch --------------------------------------------------------------


def make_spec(name: str) -> ContinuumSpec:
    """Resolve an example name to its exact spec."""
    if name == "comb":
        return comb_spec()
    if name == "broom":
        return broom_spec()
    if name == "double_broom":
        return double_broom_spec()
    if name == "teepee":
        return teepee_spec()
    if name == "example_N":
        return example_n_spec()
    m = _TOWER_INF_RE.match(name)
    if m:
        return tower_inf_spec(int(m.group(1))) if m.group(1) else tower_inf_spec()
    m = _TOWER_RE.match(name)
    if m:
        return tower_spec(int(m.group(1)))
    raise ValueError(f"unknown example {name!r}")


def example_names() -> List[str]:
    return [
        "comb",
        "broom",
        "double_broom",
        "teepee",
        "comb_tower_1",
        "comb_tower_2",
        "comb_tower_3",
        "comb_tower_inf",
        "example_N",
    ]


def gen_example(name: str, grid: GridSpec) -> Tuple[CellSet, ProbeSet]:
    """Rasterize a named example on the given grid.

    Raises ValueError for an unknown name, a grid whose base or bounding box
    does not match the example, or a finite tower too deep to resolve at the
    grid's level.
    """
    spec = make_spec(name)
    if grid.base != spec.base:
        raise ValueError(
            f"{name} is a base-{spec.base} example; got a base-{grid.base} grid"
        )
    if tuple(map(F, grid.bbox)) != tuple(map(F, spec.bbox)):
        raise ValueError(f"{name} lives on bbox {spec.bbox}, got {grid.bbox}")
    m = _TOWER_RE.match(name)
    if m:
        k = int(m.group(1))
        need = tower_min_level(k)
        if grid.level < need:
            raise ValueError(
                f"comb_tower_{k} does not resolve below level {need} "
                f"at base 6; got level {grid.level}"
            )
    return rasterize(spec, grid), spec.probe_set()


def continuum(name: str) -> RasterContinuum:
    """Level-family view of a named example."""
    return RasterContinuum(make_spec(name))
