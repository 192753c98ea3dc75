"""Finite separation queries between cells of a rasterized set.

A query asks for the smallest set of removable cells whose deletion
disconnects two given cells.  Removable always means boundary cells other
than the endpoints; by default the search also runs inside the
boundary-induced subgraph, the regime the fiber machinery works in.
Results carry a Menger-style dual witness: a separating cut of size v
together with v internally disjoint paths, or k_max + 1 such paths proving
no cut of size k_max exists.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Tuple, Union

import numpy as np

from contfiber import _kernels as kernels
from contfiber.cellset import CellSet

SEPARABLE = "SEPARABLE"
NOT_SEPARABLE = "NOT_SEPARABLE_WITHIN"

BRUTE_CELL_CAP = 400
BRUTE_KMAX_CAP = 3

Cell = Union[int, Tuple[int, int]]


@dataclass(frozen=True)
class CutResult:
    """Outcome of a separation query, with its dual witness."""

    status: str
    value: Optional[int]
    cut: Tuple[int, ...]
    paths: Tuple[Tuple[int, ...], ...]
    k_max: int
    separate_in: str
    interior: bool = False

    @property
    def separable(self) -> bool:
        return self.status == SEPARABLE


@dataclass(frozen=True)
class BruteResult:
    """Independent oracle outcome: status and value only."""

    status: str
    value: Optional[int]
    k_max: int


def _as_flat(X: CellSet, cell: Cell) -> int:
    if isinstance(cell, tuple):
        f = X.grid.flat(*cell)
    else:
        f = int(cell)
    if f not in X.cells:
        raise ValueError(f"cell {cell!r} is not in the set")
    return f


def _interior_result(k_max: int, separate_in: str) -> CutResult:
    # an interior endpoint has no boundary presence, hence no obstruction
    return CutResult(SEPARABLE, 0, (), (), k_max, separate_in, interior=True)


def min_boundary_cut(
    X: CellSet,
    x: Cell,
    y: Cell,
    k_max: int = 4,
    separate_in: str = "boundary",
    forbid: Tuple[int, ...] = (),
) -> CutResult:
    """Minimum vertex cut of removable cells between x and y.

    separate_in="boundary" (default) restricts both the cut and the
    connecting paths to the boundary-induced subgraph; "full" lets paths
    use every cell of X while cuts stay on the boundary.  Cells listed in
    `forbid` stay traversable but may not appear in the cut.
    """
    if separate_in not in ("boundary", "full"):
        raise ValueError(f"unknown separate_in mode {separate_in!r}")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    fx, fy = _as_flat(X, x), _as_flat(X, y)
    if fx == fy:
        raise ValueError("endpoints coincide")

    bd = X.boundary()
    if separate_in == "boundary":
        if fx not in bd.cells or fy not in bd.cells:
            return _interior_result(k_max, separate_in)
        G = bd
    else:
        G = X

    order = G.order
    pos = G.pos
    n = len(order)
    indptr, indices = G.csr()
    sx, sy = pos[fx], pos[fy]

    removable = np.zeros(n, dtype=np.uint8)
    if separate_in == "boundary":
        removable[:] = 1
    else:
        for f in bd.cells:
            removable[pos[f]] = 1
    for f in forbid:
        k = pos.get(int(f))
        if k is not None:
            removable[k] = 0
    removable[sx] = 0
    removable[sy] = 0

    value, cut_nodes, node_paths, hit = kernels.vertex_cut(
        n, indptr, indices, removable, sx, sy, k_max
    )
    paths = tuple(tuple(int(order[v]) for v in p) for p in node_paths)
    if hit:
        return CutResult(NOT_SEPARABLE, None, (), paths, k_max, separate_in)
    cut = tuple(sorted(int(order[v]) for v in cut_nodes))
    return CutResult(SEPARABLE, int(value), cut, paths, k_max, separate_in)


def _adjacency(G: CellSet) -> Dict[int, Tuple[int, ...]]:
    order = G.order
    indptr, indices = G.csr()
    return {
        int(order[u]): tuple(int(order[v]) for v in indices[indptr[u]:indptr[u + 1]])
        for u in range(len(order))
    }


def brute_force_min_cut(
    X: CellSet,
    x: Cell,
    y: Cell,
    k_max: int = 3,
    separate_in: str = "boundary",
) -> BruteResult:
    """Exhaustive reference oracle for small inputs.

    Branches on the cells of a current connecting path, so every explored
    subset is a partial transversal of the path system.  Capped at 400
    cells and k_max 3; raises ValueError beyond that.
    """
    if separate_in not in ("boundary", "full"):
        raise ValueError(f"unknown separate_in mode {separate_in!r}")
    if not 0 <= k_max <= BRUTE_KMAX_CAP:
        raise ValueError(f"brute force supports k_max <= {BRUTE_KMAX_CAP}")
    fx, fy = _as_flat(X, x), _as_flat(X, y)
    if fx == fy:
        raise ValueError("endpoints coincide")

    bd = X.boundary()
    if separate_in == "boundary":
        if fx not in bd.cells or fy not in bd.cells:
            return BruteResult(SEPARABLE, 0, k_max)
        G = bd
    else:
        G = X
    if len(G.cells) > BRUTE_CELL_CAP:
        raise ValueError(f"brute force capped at {BRUTE_CELL_CAP} cells")

    adj = _adjacency(G)
    removable = bd.cells - {fx, fy}
    big = k_max + 1

    def shortest_path(blocked: FrozenSet[int]) -> Optional[Tuple[int, ...]]:
        if fx in blocked or fy in blocked:
            raise AssertionError("endpoints are never removable")
        prev = {fx: fx}
        frontier = [fx]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v in prev or v in blocked:
                        continue
                    prev[v] = u
                    if v == fy:
                        path = [v]
                        while path[-1] != fx:
                            path.append(prev[path[-1]])
                        return tuple(reversed(path))
                    nxt.append(v)
            frontier = nxt
        return None

    seen: Dict[FrozenSet[int], int] = {}

    def search(blocked: FrozenSet[int]) -> int:
        if blocked in seen:
            return seen[blocked]
        path = shortest_path(blocked)
        if path is None:
            res = 0
        elif len(blocked) >= k_max:
            res = big
        else:
            res = big
            for p in path:
                if p in removable:
                    res = min(res, 1 + search(blocked | {p}))
        seen[blocked] = res
        return res

    best = search(frozenset())
    if best <= k_max:
        return BruteResult(SEPARABLE, best, k_max)
    return BruteResult(NOT_SEPARABLE, None, k_max)


def quasi_component(
    X: CellSet, x: Cell, k_max: int = 4, separate_in: str = "boundary"
) -> CellSet:
    """Cells that no cut of size <= k_max separates from x."""
    fx = _as_flat(X, x)
    bd = X.boundary()
    if separate_in == "boundary" and fx not in bd.cells:
        return CellSet(X.grid, {fx}, connectivity=X.connectivity)
    G = bd if separate_in == "boundary" else X
    kept = {fx}
    for f in G.cells:
        if f == fx:
            continue
        r = min_boundary_cut(X, fx, f, k_max=k_max, separate_in=separate_in)
        if not r.separable:
            kept.add(f)
    return CellSet(X.grid, kept, connectivity=X.connectivity)
