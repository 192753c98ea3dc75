"""Immutable cell sets on a grid, plus the rasterization entry points.

A :class:`CellSet` is a set of grid cells with a declared adjacency (8 for
the set itself, 4 for its complement). Adjacency structure, boundary and
components are computed lazily and cached on the instance; the value
itself never changes after construction.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from contfiber import _kernels
from contfiber.geometry import ContinuumSpec, Probe, ProbeSet
from contfiber.grid import GridSpec, Point

F = Fraction

_OFFSETS_4 = ((1, 0), (-1, 0), (0, 1), (0, -1))
_OFFSETS_8 = _OFFSETS_4 + ((1, 1), (1, -1), (-1, 1), (-1, -1))


class CellSet:
    """An immutable set of cells of one grid.

    ``connectivity`` is the adjacency the set's own cells use (8 by
    default; the complement always uses 4). ``connected`` records whether
    the set is known to come from a connected ideal set; it is advisory
    and never computed here.
    """

    __slots__ = ("grid", "cells", "connectivity", "connected",
                 "_order", "_pos", "_csr", "_boundary", "_components",
                 "_diameter_sq", "_hash")

    def __init__(self, grid: GridSpec, cells: Iterable[int],
                 connectivity: int = 8, connected: Optional[bool] = None):
        if connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        self.grid = grid
        if isinstance(cells, frozenset):
            self.cells = cells
        else:
            self.cells = frozenset(int(c) for c in cells)
        if self.cells:
            lo = min(self.cells)
            hi = max(self.cells)
            if lo < 0 or hi >= grid.size * grid.size:
                raise ValueError(
                    f"flat id {lo if lo < 0 else hi} outside the grid")
        self.connectivity = connectivity
        self.connected = connected
        self._order = None
        self._pos = None
        self._csr = None
        self._boundary = None
        self._components = None
        self._diameter_sq = None
        self._hash = None

    # -- value semantics ---------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, CellSet):
            return NotImplemented
        return (self.grid == other.grid and self.cells == other.cells
                and self.connectivity == other.connectivity)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.grid, self.cells, self.connectivity))
        return self._hash

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, flat: int) -> bool:
        return flat in self.cells

    def __iter__(self) -> Iterator[int]:
        return iter(self.order)

    def __repr__(self):
        g = self.grid
        return (f"CellSet(base={g.base}, level={g.level}, "
                f"n={len(self.cells)}, conn={self.connectivity})")

    # -- derived structure -------------------------------------------------

    @property
    def order(self) -> np.ndarray:
        """Member flat ids as a sorted int64 array; node k of the graph
        view is ``order[k]``."""
        if self._order is None:
            self._order = np.fromiter(sorted(self.cells), dtype=np.int64,
                                      count=len(self.cells))
        return self._order

    @property
    def pos(self) -> Dict[int, int]:
        """Inverse of :attr:`order`: flat id to node index."""
        if self._pos is None:
            self._pos = {int(f): k for k, f in enumerate(self.order)}
        return self._pos

    def ij(self, flat: int) -> Tuple[int, int]:
        return self.grid.unflat(flat)

    def cells_ij(self) -> List[Tuple[int, int]]:
        return [self.grid.unflat(int(f)) for f in self.order]

    def center(self, flat: int) -> Point:
        return self.grid.cell_center(*self.grid.unflat(flat))

    def csr(self) -> Tuple[np.ndarray, np.ndarray]:
        """Adjacency of the member cells as (indptr int64, indices int32)."""
        if self._csr is None:
            order = self.order
            n = len(order)
            S = self.grid.size
            i = order % S
            j = order // S
            offs = _OFFSETS_8 if self.connectivity == 8 else _OFFSETS_4
            srcs = []
            dsts = []
            for di, dj in offs:
                ii = i + di
                jj = j + dj
                ok = (ii >= 0) & (ii < S) & (jj >= 0) & (jj < S)
                neigh = ii + S * jj
                p = np.searchsorted(order, neigh)
                p_safe = np.minimum(p, n - 1) if n else p
                hitm = ok & (p < n) & (order[p_safe] == neigh) if n else ok
                srcs.append(np.nonzero(hitm)[0])
                dsts.append(p[hitm])
            src = np.concatenate(srcs) if srcs else np.empty(0, np.int64)
            dst = np.concatenate(dsts) if dsts else np.empty(0, np.int64)
            sel = np.lexsort((dst, src))
            src = src[sel]
            dst = dst[sel]
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            np.cumsum(indptr, out=indptr)
            self._csr = (indptr, dst.astype(np.int32))
        return self._csr

    def neighbors(self, flat: int) -> List[int]:
        indptr, indices = self.csr()
        k = self.pos[flat]
        order = self.order
        return [int(order[v]) for v in indices[indptr[k]:indptr[k + 1]]]

    def boundary(self) -> "CellSet":
        """Cells with a 4-adjacent complement cell; grid-edge cells count.

        For a set with empty ideal interior this is the whole set.
        """
        if self._boundary is None:
            order = self.order
            S = self.grid.size
            i = order % S
            j = order // S
            missing = np.zeros(len(order), dtype=bool)
            for di, dj in _OFFSETS_4:
                ii = i + di
                jj = j + dj
                inside = (ii >= 0) & (ii < S) & (jj >= 0) & (jj < S)
                missing |= ~inside
                neigh = ii + S * jj
                p = np.searchsorted(order, neigh)
                p_safe = np.minimum(p, len(order) - 1) if len(order) else p
                member = inside & (p < len(order)) & (order[p_safe] == neigh) \
                    if len(order) else inside
                missing |= inside & ~member
            if missing.all():
                self._boundary = self
            else:
                picked = order[missing]
                self._boundary = CellSet(self.grid, (int(f) for f in picked),
                                         self.connectivity)
        return self._boundary

    def interior(self) -> "CellSet":
        return CellSet(self.grid, self.cells - self.boundary().cells,
                       self.connectivity)

    def components(self) -> List["CellSet"]:
        """Connected components under the set's own adjacency, ordered by
        their smallest flat id."""
        if self._components is None:
            n = len(self.cells)
            if n == 0:
                self._components = []
            else:
                indptr, indices = self.csr()
                labels = _kernels.label_components(n, indptr, indices)
                order = self.order
                parts = []
                for lab in range(int(labels.max()) + 1):
                    flats = order[labels == lab]
                    parts.append(CellSet(self.grid, (int(f) for f in flats),
                                         self.connectivity, connected=True))
                self._components = parts
        return self._components

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def component_of(self, flat: int) -> "CellSet":
        for part in self.components():
            if flat in part.cells:
                return part
        raise KeyError(f"cell {flat} not in the set")

    # -- metrics -----------------------------------------------------------

    def diameter_sq(self) -> Fraction:
        """Exact squared diameter over cell centers."""
        if self._diameter_sq is None:
            if not self.cells:
                raise ValueError("diameter of an empty cell set")
            pts = sorted({self.center(int(f)) for f in self.order})
            hull = _convex_hull(pts)
            best = F(0)
            for a in range(len(hull)):
                ax, ay = hull[a]
                for b in range(a + 1, len(hull)):
                    bx, by = hull[b]
                    d = (ax - bx) ** 2 + (ay - by) ** 2
                    if d > best:
                        best = d
            self._diameter_sq = best
        return self._diameter_sq

    def diameter(self) -> float:
        return math.sqrt(float(self.diameter_sq()))

    # -- set algebra (grid and connectivity preserved) ---------------------

    def union(self, other: "CellSet") -> "CellSet":
        self._check_same_grid(other)
        return CellSet(self.grid, self.cells | other.cells, self.connectivity)

    def intersection(self, other: "CellSet") -> "CellSet":
        self._check_same_grid(other)
        return CellSet(self.grid, self.cells & other.cells, self.connectivity)

    def difference(self, removed: Iterable[int]) -> "CellSet":
        if isinstance(removed, CellSet):
            self._check_same_grid(removed)
            removed = removed.cells
        return CellSet(self.grid, self.cells - frozenset(removed),
                       self.connectivity)

    def _check_same_grid(self, other: "CellSet"):
        if self.grid != other.grid:
            raise ValueError("cell sets live on different grids")

    # -- point queries -----------------------------------------------------

    def snap(self, p: Point) -> Tuple[int, int]:
        """The canonical member cell holding the exact point p."""
        return self.grid.snap(p, self.cells)

    def contains_point(self, p: Point) -> bool:
        try:
            self.snap(p)
            return True
        except ValueError:
            return False

    # -- serialization hooks -----------------------------------------------

    def to_runs(self) -> List[List[List[int]]]:
        """Per-row run-length encoding: entry j lists [start, length] runs."""
        S = self.grid.size
        rows: List[List[List[int]]] = [[] for _ in range(S)]
        for f in self.order:
            i = int(f) % S
            j = int(f) // S
            row = rows[j]
            if row and row[-1][0] + row[-1][1] == i:
                row[-1][1] += 1
            else:
                row.append([i, 1])
        return rows

    @classmethod
    def from_runs(cls, grid: GridSpec, rows, connectivity: int = 8) -> "CellSet":
        S = grid.size
        if len(rows) != S:
            raise ValueError(f"expected {S} rows, got {len(rows)}")
        flats = []
        for j, row in enumerate(rows):
            for start, length in row:
                if start < 0 or start + length > S or length <= 0:
                    raise ValueError(f"bad run [{start}, {length}] in row {j}")
                flats.extend(range(j * S + start, j * S + start + length))
        return cls(grid, flats, connectivity)

    def to_pgm(self) -> bytes:
        """Binary PGM (P5), top row of the image = highest-j row."""
        S = self.grid.size
        img = np.zeros((S, S), dtype=np.uint8)
        order = self.order
        img[order // S, order % S] = 255
        img = img[::-1]
        return b"P5\n%d %d\n255\n" % (S, S) + img.tobytes()


def _convex_hull(pts: List[Point]) -> List[Point]:
    # Monotone chain on exact coordinates; pts must be sorted and unique.
    if len(pts) <= 2:
        return list(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: List[Point] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


# ---------------------------------------------------------------------------
# rasterization


def rasterize(spec: ContinuumSpec, grid: GridSpec) -> CellSet:
    """Exact raster of the spec's ideal set on one grid."""
    if grid.base != spec.base or grid.bbox != spec.bbox:
        raise ValueError(f"grid family mismatch for spec {spec.name!r}")
    flats: set = set()
    for prim in spec.active_primitives(grid):
        flats.update(grid.flat(i, j) for i, j in prim.cells(grid))
    return CellSet(grid, flats, connectivity=8,
                   connected=spec.connected or None)


def boundary_cells(X: CellSet) -> CellSet:
    return X.boundary()


def components(X: CellSet) -> List[CellSet]:
    return X.components()


def diameter(X: CellSet) -> float:
    return X.diameter()


class RasterContinuum:
    """A continuum viewed across the whole grid family: one spec, many levels.

    Rasters are cached per level; higher layers also park their own
    per-family caches here so repeated queries stay cheap.
    """

    def __init__(self, spec: ContinuumSpec):
        self.spec = spec
        self._levels: Dict[int, CellSet] = {}
        self.caches: Dict[str, dict] = {}

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def probes(self) -> ProbeSet:
        return self.spec.probe_set()

    def grid(self, level: int) -> GridSpec:
        return self.spec.grid(level)

    def at_level(self, level: int) -> CellSet:
        if level not in self._levels:
            self._levels[level] = rasterize(self.spec, self.grid(level))
        return self._levels[level]

    def probe_cell(self, probe: Probe, level: int) -> Tuple[int, int]:
        return self.at_level(level).snap(probe.point)

    def anchor_point(self, level: int, ij: Tuple[int, int],
                     prefer=None) -> Optional[Point]:
        """An exact ideal point of the continuum inside the given cell."""
        memo = self.cache("anchor_points")
        key = (level, ij[0], ij[1], prefer)
        if key not in memo:
            memo[key] = self.spec.anchor_in_cell(
                self.grid(level), ij[0], ij[1], prefer_coord=prefer,
                cells=self.at_level(level).cells)
        return memo[key]

    def cache(self, kind: str) -> dict:
        return self.caches.setdefault(kind, {})
