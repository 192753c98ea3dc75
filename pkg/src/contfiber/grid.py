"""Exact finite-resolution grids over a square bounding box.

A grid splits a square bbox into S x S cells, S = base**level. Cells are
addressed (i, j): i is the column along x, j the row along y, y grows
upward. The flat index is j * S + i. All coordinates are Fractions; no
float ever enters a containment or snapping decision.

Cell membership conventions (shared by every rasterizer):

* non-degenerate intervals claim exactly the cells their interior
  overlaps with positive length;
* a degenerate coordinate sitting on an interior gridline belongs to the
  cell below / to the left of the line;
* everything is clamped to the grid, so bbox-edge features land in the
  outermost cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

Point = Tuple[Fraction, Fraction]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("grid geometry is exact; pass int, str or Fraction, not float")
    return Fraction(x)


@dataclass(frozen=True)
class GridSpec:
    """An S x S cell lattice over a square bbox at a given base and level."""

    base: int
    level: int
    bbox: Tuple[Fraction, Fraction, Fraction, Fraction]

    def __post_init__(self):
        if self.base not in (2, 3, 6):
            raise ValueError(f"unsupported grid base {self.base}")
        if self.level < 0:
            raise ValueError("level must be >= 0")
        x0, y0, x1, y1 = (_frac(v) for v in self.bbox)
        if x1 <= x0 or y1 <= y0:
            raise ValueError("empty bbox")
        if x1 - x0 != y1 - y0:
            raise ValueError("bbox must be square")
        object.__setattr__(self, "bbox", (x0, y0, x1, y1))

    @property
    def size(self) -> int:
        return self.base ** self.level

    @property
    def h(self) -> Fraction:
        x0, _, x1, _ = self.bbox
        return (x1 - x0) / self.size

    def with_level(self, level: int) -> "GridSpec":
        return GridSpec(self.base, level, self.bbox)

    # -- index arithmetic -------------------------------------------------

    def flat(self, i: int, j: int) -> int:
        return j * self.size + i

    def unflat(self, f: int) -> Tuple[int, int]:
        return f % self.size, f // self.size

    def in_range(self, i: int, j: int) -> bool:
        return 0 <= i < self.size and 0 <= j < self.size

    def cell_box(self, i: int, j: int) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        x0, y0, _, _ = self.bbox
        h = self.h
        return (x0 + i * h, y0 + j * h, x0 + (i + 1) * h, y0 + (j + 1) * h)

    def cell_center(self, i: int, j: int) -> Point:
        x0, y0, _, _ = self.bbox
        h = self.h
        return (x0 + i * h + h / 2, y0 + j * h + h / 2)

    # -- coordinate mapping -----------------------------------------------

    def to_axis(self, v, axis: int) -> Fraction:
        """Map a geometry coordinate to grid units along the given axis."""
        origin = self.bbox[0] if axis == 0 else self.bbox[1]
        return (_frac(v) - origin) / self.h

    def axis_cells(self, a, b, axis: int) -> range:
        """Cell indices claimed by the closed interval [a, b] on an axis.

        Positive-length intervals claim the cells they overlap with
        positive measure; a degenerate interval on an interior gridline
        claims the cell below / to the left. Clamped to the grid; empty
        only when [a, b] lies strictly outside the bbox.
        """
        a = _frac(a)
        b = _frac(b)
        if b < a:
            a, b = b, a
        ta = self.to_axis(a, axis)
        tb = self.to_axis(b, axis)
        S = self.size
        if tb < 0 or ta > S:
            return range(0)
        if ta == tb:
            fl = _floor(ta)
            idx = fl - 1 if ta == fl else fl
            idx = min(max(idx, 0), S - 1)
            return range(idx, idx + 1)
        lo = _floor(ta)
        hi = int(tb) - 1 if tb == _floor(tb) else _floor(tb)
        lo = max(lo, 0)
        hi = min(hi, S - 1)
        if hi < lo:
            return range(0)
        return range(lo, hi + 1)

    def cells_containing(self, p: Point) -> List[Tuple[int, int]]:
        """All cells whose closed square contains p, clamped to the grid.

        A point on an interior gridline belongs to 2 or 4 closed cells;
        a point outside the bbox belongs to none.
        """
        x, y = _frac(p[0]), _frac(p[1])
        xs = self._axis_candidates(self.to_axis(x, 0))
        ys = self._axis_candidates(self.to_axis(y, 1))
        return [(i, j) for j in ys for i in xs]

    def _axis_candidates(self, t: Fraction) -> List[int]:
        S = self.size
        if t < 0 or t > S:
            return []
        fl = _floor(t)
        out = []
        for idx in (fl - 1, fl):
            if 0 <= idx <= S - 1 and idx <= t <= idx + 1:
                out.append(idx)
        return out

    def snap(self, p: Point, cells: "frozenset[int]") -> Tuple[int, int]:
        """The lexicographically least raster cell whose closed square holds p.

        `cells` is the raster's flat-index set. Raises if p misses it, which
        means p is not a point of the rasterized continuum.
        """
        cands = [c for c in self.cells_containing(p) if self.flat(*c) in cells]
        if not cands:
            raise ValueError(f"point {p} does not touch the raster at level {self.level}")
        return min(cands)

    # -- level relations --------------------------------------------------

    def child_factor(self, finer: "GridSpec") -> int:
        if finer.base != self.base or finer.bbox != self.bbox:
            raise ValueError("grids are not members of one family")
        if finer.level < self.level:
            raise ValueError("finer grid must have the larger level")
        return self.base ** (finer.level - self.level)

    def ancestor_of(self, i: int, j: int, coarser: "GridSpec") -> Tuple[int, int]:
        f = coarser.child_factor(self)
        return i // f, j // f

    def children_of(self, i: int, j: int, finer: "GridSpec") -> Iterator[Tuple[int, int]]:
        f = self.child_factor(finer)
        for jj in range(j * f, (j + 1) * f):
            for ii in range(i * f, (i + 1) * f):
                yield ii, jj


def _floor(t: Fraction) -> int:
    return t.numerator // t.denominator


def make_grid(base: int, level: int, bbox) -> GridSpec:
    x0, y0, x1, y1 = (_frac(v) for v in bbox)
    return GridSpec(base, level, (x0, y0, x1, y1))
