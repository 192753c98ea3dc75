"""Exact geometric primitives and their rasterization.

Four primitive kinds cover every bundled example:

* ``Box`` -- an axis-aligned closed box, possibly degenerate (segment or
  point);
* ``Segment`` -- a closed line segment with rational endpoints;
* ``CantorBand`` -- an affine image of the middle-thirds set on one axis
  crossed with an interval on the other;
* ``CantorCone`` -- the union of segments joining one apex to every point
  of an affine Cantor set on a horizontal line.

Cell membership is exact. Boxes and axis-parallel segments use the
positive-overlap / below-left rules from :mod:`contfiber.grid`. Oblique
segments and cone legs claim the cells whose open interior they meet, so
corner touches never connect. Cantor axes claim a cell iff the cell's
open interval meets the ideal set; the set is perfect, so no gridline
tie-break is ever needed there.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd as _gcd
from typing import Iterator, List, Optional, Set, Tuple

from contfiber.grid import GridSpec, Point, _frac

F = Fraction

_ZERO = F(0)
_ONE = F(1)
_THIRD = F(1, 3)
_TWO_THIRDS = F(2, 3)


# ---------------------------------------------------------------------------
# middle-thirds set queries (all exact, all terminating)


def cantor_open_meets(u: Fraction, v: Fraction) -> bool:
    """Whether the middle-thirds set meets the open interval (u, v)."""
    while True:
        if v <= u:
            return False
        if v <= _ZERO or u >= _ONE:
            return False
        if u < _ZERO or v > _ONE:
            return True  # contains the endpoint 0 or 1
        # interval inside [0, 1]; each pass triples its length
        if v <= _THIRD:
            u, v = 3 * u, 3 * v
        elif u >= _TWO_THIRDS:
            u, v = 3 * u - 2, 3 * v - 2
        elif u >= _THIRD and v <= _TWO_THIRDS:
            return False  # strictly inside the middle gap
        else:
            return True  # straddles 1/3 or 2/3, both of which belong


def cantor_contains(c: Fraction) -> bool:
    """Exact membership of a rational in the middle-thirds set.

    The orbit of a rational under the digit maps is eventually periodic;
    revisiting a value without falling into a gap proves membership.
    """
    if c < _ZERO or c > _ONE:
        return False
    seen: Set[Fraction] = set()
    while True:
        if c == _ZERO or c == _ONE:
            return True
        if _THIRD < c < _TWO_THIRDS:
            return False
        if c in seen:
            return True
        seen.add(c)
        c = 3 * c if c <= _THIRD else 3 * c - 2


def cantor_point_in(u: Fraction, v: Fraction) -> Optional[Fraction]:
    """A deterministic member of the middle-thirds set inside (u, v).

    Returns None when the set misses the interval. Prefers coarse points
    (endpoints of removed gaps), so the result has a small denominator.
    """
    if not cantor_open_meets(u, v):
        return None
    scale = _ONE
    offset = _ZERO
    while True:
        # invariant: answer = offset + scale * (point of K in (u, v))
        if u < _ZERO < v:
            return offset
        if u < _ONE < v:
            return offset + scale
        if u < _THIRD < v:
            return offset + scale / 3
        if u < _TWO_THIRDS < v:
            return offset + 2 * scale / 3
        if v <= _THIRD:
            u, v = 3 * u, 3 * v
            scale /= 3
        else:
            u, v = 3 * u - 2, 3 * v - 2
            offset += 2 * scale / 3
            scale /= 3


# ---------------------------------------------------------------------------
# primitives


class Primitive:
    """Common surface of all exact primitives."""

    #: smallest geometric feature of this primitive, used to drop members
    #: of infinite families once they fall below one cell; None = keep
    feature_scale: Optional[Fraction] = None

    def cells(self, grid: GridSpec) -> Iterator[Tuple[int, int]]:
        raise NotImplementedError

    def transformed(self, sx, sy, tx, ty) -> "Primitive":
        """Image under the diagonal affine map (x, y) -> (sx*x+tx, sy*y+ty)."""
        raise NotImplementedError

    def point_in_box(self, box) -> Optional[Point]:
        """Some exact point of the primitive inside a closed box, else None."""
        raise NotImplementedError

    def point_on_line(self, axis: int, coord: Fraction, box) -> Optional[Point]:
        """A primitive point with the given axis-coordinate, inside the box."""
        return None


def _box_overlap_1d(lo, hi, a, b) -> Optional[Tuple[Fraction, Fraction]]:
    lo2, hi2 = max(lo, a), min(hi, b)
    if hi2 < lo2:
        return None
    return lo2, hi2


def _scaled_feature(fs: Optional[Fraction], sx, sy) -> Optional[Fraction]:
    # a scaled copy's smallest feature scales with the map
    if fs is None:
        return None
    return fs * max(abs(_frac(sx)), abs(_frac(sy)))


@dataclass(frozen=True)
class Box(Primitive):
    """Closed axis-aligned box; degenerate sides make segments and points."""

    x0: Fraction
    y0: Fraction
    x1: Fraction
    y1: Fraction
    feature_scale: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "x0", _frac(self.x0))
        object.__setattr__(self, "y0", _frac(self.y0))
        object.__setattr__(self, "x1", _frac(self.x1))
        object.__setattr__(self, "y1", _frac(self.y1))
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ValueError("box corners out of order")

    def cells(self, grid: GridSpec):
        for j in grid.axis_cells(self.y0, self.y1, 1):
            for i in grid.axis_cells(self.x0, self.x1, 0):
                yield i, j

    def transformed(self, sx, sy, tx, ty):
        sx, sy, tx, ty = map(_frac, (sx, sy, tx, ty))
        xs = sorted((sx * self.x0 + tx, sx * self.x1 + tx))
        ys = sorted((sy * self.y0 + ty, sy * self.y1 + ty))
        return Box(xs[0], ys[0], xs[1], ys[1],
                   feature_scale=_scaled_feature(self.feature_scale, sx, sy))

    def point_in_box(self, box):
        bx0, by0, bx1, by1 = box
        ox = _box_overlap_1d(self.x0, self.x1, bx0, bx1)
        oy = _box_overlap_1d(self.y0, self.y1, by0, by1)
        if ox is None or oy is None:
            return None
        return ((ox[0] + ox[1]) / 2, (oy[0] + oy[1]) / 2)

    def point_on_line(self, axis, coord, box):
        coord = _frac(coord)
        if axis == 0:
            if not (self.x0 <= coord <= self.x1):
                return None
            probe = Box(coord, self.y0, coord, self.y1)
        else:
            if not (self.y0 <= coord <= self.y1):
                return None
            probe = Box(self.x0, coord, self.x1, coord)
        return probe.point_in_box(box)


@dataclass(frozen=True)
class Segment(Primitive):
    """Closed segment. Axis-parallel ones follow the box rules; oblique
    ones claim exactly the cells whose open interior they cross."""

    ax: Fraction
    ay: Fraction
    bx: Fraction
    by: Fraction
    feature_scale: Optional[Fraction] = None

    def __post_init__(self):
        for name in ("ax", "ay", "bx", "by"):
            object.__setattr__(self, name, _frac(getattr(self, name)))

    def _as_box(self) -> Optional[Box]:
        if self.ax == self.bx or self.ay == self.by:
            xs = sorted((self.ax, self.bx))
            ys = sorted((self.ay, self.by))
            return Box(xs[0], ys[0], xs[1], ys[1])
        return None

    def cells(self, grid: GridSpec):
        box = self._as_box()
        if box is not None:
            yield from box.cells(grid)
            return
        yield from self._oblique_cells(grid)

    def _oblique_cells(self, grid: GridSpec):
        # crossing-parameter method: cut the parameter range at every
        # gridline crossing, then classify each open piece by its midpoint
        dx = self.bx - self.ax
        dy = self.by - self.ay
        params = {F(0), F(1)}
        for axis, a, d in ((0, self.ax, dx), (1, self.ay, dy)):
            origin = grid.bbox[0] if axis == 0 else grid.bbox[1]
            h = grid.h
            t0 = (a - origin) / h
            td = d / h
            # solve t0 + s * td = k for integer k
            lo, hi = sorted((t0, t0 + td))
            k0 = lo.numerator // lo.denominator
            k1 = hi.numerator // hi.denominator + 1
            for k in range(k0, k1 + 1):
                s = (k - t0) / td
                if 0 < s < 1:
                    params.add(s)
        cuts = sorted(params)
        S = grid.size
        seen = set()
        for p, q in zip(cuts, cuts[1:]):
            m = (p + q) / 2
            x = self.ax + m * dx
            y = self.ay + m * dy
            ti = grid.to_axis(x, 0)
            tj = grid.to_axis(y, 1)
            i = ti.numerator // ti.denominator
            j = tj.numerator // tj.denominator
            # strict floor is safe: midpoints never sit on gridlines
            if 0 <= i < S and 0 <= j < S and (i, j) not in seen:
                seen.add((i, j))
                yield i, j

    def transformed(self, sx, sy, tx, ty):
        sx, sy, tx, ty = map(_frac, (sx, sy, tx, ty))
        return Segment(
            sx * self.ax + tx,
            sy * self.ay + ty,
            sx * self.bx + tx,
            sy * self.by + ty,
            feature_scale=_scaled_feature(self.feature_scale, sx, sy),
        )

    def _param_range_in_box(self, box) -> Optional[Tuple[Fraction, Fraction]]:
        bx0, by0, bx1, by1 = box
        lo, hi = F(0), F(1)
        for a, d, wlo, whi in (
            (self.ax, self.bx - self.ax, bx0, bx1),
            (self.ay, self.by - self.ay, by0, by1),
        ):
            if d == 0:
                if not (wlo <= a <= whi):
                    return None
                continue
            s0 = (wlo - a) / d
            s1 = (whi - a) / d
            if s1 < s0:
                s0, s1 = s1, s0
            lo, hi = max(lo, s0), min(hi, s1)
        if hi < lo:
            return None
        return lo, hi

    def point_in_box(self, box):
        rng = self._param_range_in_box(box)
        if rng is None:
            return None
        m = (rng[0] + rng[1]) / 2
        return (
            self.ax + m * (self.bx - self.ax),
            self.ay + m * (self.by - self.ay),
        )

    def point_on_line(self, axis, coord, box):
        coord = _frac(coord)
        a = self.ax if axis == 0 else self.ay
        d = (self.bx - self.ax) if axis == 0 else (self.by - self.ay)
        if d == 0:
            if a != coord:
                return None
            return self.point_in_box(box)
        s = (coord - a) / d
        if not (F(0) <= s <= F(1)):
            return None
        p = (self.ax + s * (self.bx - self.ax), self.ay + s * (self.by - self.ay))
        bx0, by0, bx1, by1 = box
        if bx0 <= p[0] <= bx1 and by0 <= p[1] <= by1:
            return p
        return None


@dataclass(frozen=True)
class CantorBand(Primitive):
    """{offset + scale*c : c in K} on `cantor_axis`, an interval across.

    ``cantor_axis`` 0 puts the set on x (vertical strands), 1 on y.
    ``scale`` may be negative; 1 - K = K keeps the image an affine copy.
    """

    cantor_axis: int
    offset: Fraction
    scale: Fraction
    lo: Fraction
    hi: Fraction
    feature_scale: Optional[Fraction] = None

    def __post_init__(self):
        for name in ("offset", "scale", "lo", "hi"):
            object.__setattr__(self, name, _frac(getattr(self, name)))
        if self.scale == 0:
            raise ValueError("zero-scale band degenerates; use Box")
        if self.hi < self.lo:
            raise ValueError("empty cross interval")
        if self.cantor_axis not in (0, 1):
            raise ValueError("cantor_axis must be 0 or 1")

    def _pullback(self, a: Fraction, b: Fraction) -> Tuple[Fraction, Fraction]:
        u = (a - self.offset) / self.scale
        v = (b - self.offset) / self.scale
        return (u, v) if u <= v else (v, u)

    def _strand_cols(self, grid: GridSpec) -> Iterator[int]:
        ends = sorted((self.offset, self.offset + self.scale))
        for i in grid.axis_cells(ends[0], ends[1], self.cantor_axis):
            x0, y0, _, _ = grid.bbox
            origin = x0 if self.cantor_axis == 0 else y0
            a = origin + i * grid.h
            b = a + grid.h
            if cantor_open_meets(*self._pullback(a, b)):
                yield i

    def cells(self, grid: GridSpec):
        cross = list(grid.axis_cells(self.lo, self.hi, 1 - self.cantor_axis))
        for i in self._strand_cols(grid):
            for j in cross:
                yield (i, j) if self.cantor_axis == 0 else (j, i)

    def transformed(self, sx, sy, tx, ty):
        sx, sy, tx, ty = map(_frac, (sx, sy, tx, ty))
        if self.cantor_axis == 0:
            off, sc = sx * self.offset + tx, sx * self.scale
            c0, c1 = sorted((sy * self.lo + ty, sy * self.hi + ty))
        else:
            off, sc = sy * self.offset + ty, sy * self.scale
            c0, c1 = sorted((sx * self.lo + tx, sx * self.hi + tx))
        return CantorBand(self.cantor_axis, off, sc, c0, c1,
                          feature_scale=_scaled_feature(self.feature_scale, sx, sy))

    def point_in_box(self, box):
        bx0, by0, bx1, by1 = box
        if self.cantor_axis == 0:
            main, cross = (bx0, bx1), (by0, by1)
        else:
            main, cross = (by0, by1), (bx0, bx1)
        oc = _box_overlap_1d(self.lo, self.hi, cross[0], cross[1])
        if oc is None:
            return None
        c = _cantor_point_in_closed(*self._pullback(main[0], main[1]))
        if c is None:
            return None
        m = self.offset + self.scale * c
        cr = (oc[0] + oc[1]) / 2
        return (m, cr) if self.cantor_axis == 0 else (cr, m)

    def point_on_line(self, axis, coord, box):
        coord = _frac(coord)
        if axis == 1 - self.cantor_axis:
            if not (self.lo <= coord <= self.hi):
                return None
            bx0, by0, bx1, by1 = box
            if self.cantor_axis == 0:
                if not (by0 <= coord <= by1):
                    return None
                sub = (bx0, coord, bx1, coord)
            else:
                if not (bx0 <= coord <= bx1):
                    return None
                sub = (coord, by0, coord, by1)
            return self.point_in_box(sub)
        c = (coord - self.offset) / self.scale
        if not cantor_contains(c):
            return None
        bx0, by0, bx1, by1 = box
        if self.cantor_axis == 0:
            oc = _box_overlap_1d(self.lo, self.hi, by0, by1)
            if oc is None or not (bx0 <= coord <= bx1):
                return None
            return (coord, (oc[0] + oc[1]) / 2)
        oc = _box_overlap_1d(self.lo, self.hi, bx0, bx1)
        if oc is None or not (by0 <= coord <= by1):
            return None
        return ((oc[0] + oc[1]) / 2, coord)


@dataclass(frozen=True)
class CantorCone(Primitive):
    """Segments from (offset + scale*c, foot_y), c in K, to one apex.

    The apex must not lie on the foot line. Rasterization is exact and
    follows the open-interior rule of oblique segments: a cell is claimed
    iff some leg passes through its open square. Per row the admissible
    Cantor parameters form a single open interval, because the leg's x at
    a fixed height is affine in the parameter with a sign fixed by
    ``scale``; one interval query against the middle-thirds set decides
    the cell.
    """

    apex_x: Fraction
    apex_y: Fraction
    foot_y: Fraction
    offset: Fraction
    scale: Fraction
    feature_scale: Optional[Fraction] = None

    def __post_init__(self):
        for name in ("apex_x", "apex_y", "foot_y", "offset", "scale"):
            object.__setattr__(self, name, _frac(getattr(self, name)))
        if self.apex_y == self.foot_y:
            raise ValueError("apex on the foot line")
        if self.scale == 0:
            raise ValueError("zero-scale cone degenerates; use Segment")

    def _foot(self, c: Fraction) -> Fraction:
        return self.offset + self.scale * c

    def _leg_x(self, c: Fraction, t: Fraction) -> Fraction:
        return self._foot(c) * (1 - t) + self.apex_x * t

    def _leg_y(self, t: Fraction) -> Fraction:
        return self.foot_y + t * (self.apex_y - self.foot_y)

    def _t_window(self, ylo, yhi, open_iv: bool) -> Optional[Tuple[Fraction, Fraction]]:
        """Leg times spent in the given y-range, clamped to [0, 1]."""
        span = self.apex_y - self.foot_y
        t0 = (ylo - self.foot_y) / span
        t1 = (yhi - self.foot_y) / span
        if t1 < t0:
            t0, t1 = t1, t0
        if open_iv:
            if t0 >= 1 or t1 <= 0:
                return None
        else:
            if t0 > 1 or t1 < 0:
                return None
        return max(t0, F(0)), min(t1, F(1))

    def _x_coeffs(self, t: Fraction) -> Tuple[Fraction, Fraction]:
        # x at time t as a function of the Cantor parameter c
        return (1 - t) * self.scale, (1 - t) * self.offset + t * self.apex_x

    def _c_window(self, box, closed: bool) -> Optional[Tuple[Fraction, Fraction]]:
        """Parameters whose legs meet the box; open or closed semantics.

        The leg's x over the t-window is an interval with endpoints at
        the window ends (affine in t), so the meet condition is
        min < xu and max > xl (with <= for the closed form). Both
        endpoint maps have c-slope of one sign, so each union of the two
        half-line conditions is a half-line and the result one interval.
        Unbounded sides come back as sentinels outside [-1, 2].
        """
        xl, ylo, xu, yhi = box
        win = self._t_window(ylo, yhi, open_iv=not closed)
        if win is None:
            return None
        maps = [self._x_coeffs(t) for t in win]
        lo, hi = F(-2), F(3)  # sentinels; the Cantor set lives in [0, 1]
        for bound, side in ((xu, "below"), (xl, "above")):
            # union over the two endpoint maps of {c : x(c) on `side` of bound}
            best = None
            for coef, off in maps:
                if coef == 0:
                    ok = (off <= bound if side == "below" else off >= bound) \
                        if closed else \
                        (off < bound if side == "below" else off > bound)
                    if ok:
                        best = ("all", None)
                        break
                    continue
                u = (bound - off) / coef
                kind = "lt" if (coef > 0) == (side == "below") else "gt"
                if best is None or best[0] != kind:
                    cand = (kind, u)
                else:
                    pick = max if kind == "lt" else min
                    cand = (kind, pick(best[1], u))
                best = cand
            if best is None:
                return None
            if best[0] == "all":
                continue
            if best[0] == "lt":
                hi = min(hi, best[1])
            else:
                lo = max(lo, best[1])
        if closed:
            if hi < lo:
                return None
        elif hi <= lo:
            return None
        return lo, hi

    def cells(self, grid: GridSpec):
        # Depth d so every cell's parameter window is at least one
        # generation-d interval wide; then per-interval bounding quads
        # reproduce the per-cell open-meet test exactly (an open window
        # at least as wide as an interval meets the ideal set iff it
        # meets the interval, endpoints being two-sided limit points).
        need = abs(self.scale) * grid.size / (grid.bbox[2] - grid.bbox[0])
        d = 0
        while 3 ** d < need:
            d += 1
        if 2 ** d > 4096:
            yield from self._cells_percell(grid)
            return
        yield from self._cells_legquads(grid, d)

    def _cells_percell(self, grid: GridSpec):
        S = grid.size
        for j in range(S):
            _, ylo, _, yhi = grid.cell_box(0, j)
            win = self._t_window(ylo, yhi, open_iv=True)
            if win is None:
                continue
            tA, tB = win
            xs = [self._leg_x(c, t) for c in (F(0), F(1)) for t in (tA, tB)]
            for i in grid.axis_cells(min(xs), max(xs), 0):
                w = self._c_window(grid.cell_box(i, j), closed=False)
                if w is not None and cantor_open_meets(*w):
                    yield i, j

    def _cells_legquads(self, grid: GridSpec, d: int):
        """Union of per-interval quad rasters, in exact integer form.

        One generation-d interval [q, q+1]/3^d sweeps a quad between the
        foot segment and the apex. Per row the quad's x-slice is an
        interval with endpoints at the four (c, t) corners, so the
        claimed columns form a contiguous run found by integer division
        once every quantity is scaled to a common denominator.
        """
        import numpy as np

        S = grid.size
        x0, y0 = grid.bbox[0], grid.bbox[1]
        h = grid.h
        T = 3 ** d
        # time at the j-th horizontal gridline, as (A + j*B) / D
        dy = self.apex_y - self.foot_y
        A0, B0, D0 = (y0 - self.foot_y) * S, h * S, dy * S
        L = A0.denominator
        for v in (B0, D0):
            L = L * v.denominator // _gcd(L, v.denominator)
        A, B, D = int(A0 * L), int(B0 * L), int(D0 * L)
        if D < 0:
            A, B, D = -A, -B, -D
        # leg x at (c, t) = (q/T, p/D) has numerator over D*T*M
        M = self.offset.denominator
        for v in (self.scale, self.apex_x):
            M = M * v.denominator // _gcd(M, v.denominator)
        offN = int(self.offset * M * T)
        sclN = int(self.scale * M)
        apxN = int(self.apex_x * M * T)
        XD = D * T * M
        # gridline compare: x < x0 + i*h  <=>  xnum*G < x0G*XD + i*H
        G = x0.denominator * h.denominator // _gcd(x0.denominator, h.denominator)
        x0G = int(x0 * G)
        H = int(h * G) * XD
        C0 = x0G * XD
        worst = (D + abs(A) + abs(B) * S) * (abs(offN) + abs(sclN) * T + abs(apxN)) * G
        if worst >= 2 ** 62:
            yield from self._cells_percell(grid)
            return

        starts = [0]
        for _ in range(d):
            starts = [3 * s for s in starts] + [3 * s + 2 for s in starts]

        j = np.arange(S, dtype=np.int64)
        p0 = A + j * B
        p1 = p0 + B
        lo = np.minimum(p0, p1)
        hi = np.maximum(p0, p1)
        rowok = (lo < D) & (hi > 0)
        pA = np.maximum(lo, 0)
        pB = np.minimum(hi, D)
        qA = D - pA
        qB = D - pB
        diff = np.zeros((S, S + 1), dtype=np.int16)
        for s in starts:
            fa = offN + sclN * s
            fb = fa + sclN
            xs = (qA * fa + pA * apxN, qB * fa + pB * apxN,
                  qA * fb + pA * apxN, qB * fb + pB * apxN)
            xmin = np.minimum(np.minimum(xs[0], xs[1]), np.minimum(xs[2], xs[3]))
            xmax = np.maximum(np.maximum(xs[0], xs[1]), np.maximum(xs[2], xs[3]))
            imin = np.maximum((xmin * G - C0) // H, 0)
            imax = np.minimum((xmax * G - C0 - 1) // H, S - 1)
            keep = rowok & (imin <= imax)
            np.add.at(diff, (j[keep], imin[keep]), 1)
            np.add.at(diff, (j[keep], imax[keep] + 1), -1)
        occ = np.cumsum(diff[:, :S], axis=1, dtype=np.int32) > 0
        for jj, ii in zip(*np.nonzero(occ)):
            yield int(ii), int(jj)

    def transformed(self, sx, sy, tx, ty):
        sx, sy, tx, ty = map(_frac, (sx, sy, tx, ty))
        return CantorCone(
            sx * self.apex_x + tx,
            sy * self.apex_y + ty,
            sy * self.foot_y + ty,
            sx * self.offset + tx,
            sx * self.scale,
            feature_scale=_scaled_feature(self.feature_scale, sx, sy),
        )

    def point_in_box(self, box):
        bx0, by0, bx1, by1 = box
        w = self._c_window(box, closed=True)
        if w is None:
            return None
        c = _cantor_point_in_closed(max(w[0], F(0)), min(w[1], F(1)))
        if c is None:
            return None
        # pick a time inside the window where this leg is in the box
        win = self._t_window(by0, by1, open_iv=False)
        tA, tB = win
        fx = self._foot(c)
        if fx == self.apex_x:
            tm = (tA + tB) / 2
            return (self.apex_x, self._leg_y(tm))
        s0 = (bx0 - fx) / (self.apex_x - fx)
        s1 = (bx1 - fx) / (self.apex_x - fx)
        if s1 < s0:
            s0, s1 = s1, s0
        tlo, thi = max(tA, s0), min(tB, s1)
        if thi < tlo:
            return None  # c chosen from the window, so never reached
        tm = (tlo + thi) / 2
        return (self._leg_x(c, tm), self._leg_y(tm))

    def point_on_line(self, axis, coord, box):
        coord = _frac(coord)
        if axis == 1:
            if not (box[1] <= coord <= box[3]):
                return None
            span = self.apex_y - self.foot_y
            t = (coord - self.foot_y) / span
            if not (F(0) <= t <= F(1)):
                return None
            return self.point_in_box((box[0], coord, box[2], coord))
        # axis == 0: leg points with x = coord inside the box
        if not (box[0] <= coord <= box[2]):
            return None
        win = self._t_window(box[1], box[3], open_iv=False)
        if win is None:
            return None
        tA, tB = win
        if coord == self.apex_x:
            if tB == 1:
                return (self.apex_x, self.apex_y)
            c_star = (self.apex_x - self.offset) / self.scale
            if cantor_contains(c_star):
                return (self.apex_x, self._leg_y((tA + tB) / 2))
            return None
        if tA == 1:
            return None
        # c along the line x = coord is monotone in t; endpoints bound it
        def c_at(t):
            return ((coord - t * self.apex_x) / (1 - t) - self.offset) / self.scale

        increasing = (coord - self.apex_x) / self.scale > 0
        cA = c_at(tA)
        if tB == 1:
            cB = F(2) if increasing else F(-1)
        else:
            cB = c_at(tB)
        u, v = (cA, cB) if cA <= cB else (cB, cA)
        c = _cantor_point_in_closed(max(u, F(0)), min(v, F(1)))
        if c is None:
            return None
        fx = self._foot(c)
        t = (coord - fx) / (self.apex_x - fx)
        return (coord, self._leg_y(t))


def _cantor_point_in_closed(u: Fraction, v: Fraction) -> Optional[Fraction]:
    """A middle-thirds point in the closed interval [u, v], else None."""
    if v < u:
        return None
    if cantor_contains(u):
        return u
    if cantor_contains(v):
        return v
    return cantor_point_in(u, v)


# ---------------------------------------------------------------------------
# continuum description


@dataclass(frozen=True)
class Probe:
    """A labelled ideal point with the structural role it is expected to play."""

    label: str
    point: Point
    role: str = "generic"

    def __post_init__(self):
        object.__setattr__(self, "point", (_frac(self.point[0]), _frac(self.point[1])))


class ProbeSet:
    """Ordered, label-addressable collection of probes."""

    def __init__(self, probes):
        self.probes = tuple(probes)
        self._by_label = {p.label: p for p in self.probes}
        if len(self._by_label) != len(self.probes):
            raise ValueError("duplicate probe labels")

    def __iter__(self):
        return iter(self.probes)

    def __len__(self):
        return len(self.probes)

    def __getitem__(self, k):
        if isinstance(k, str):
            return self._by_label[k]
        return self.probes[k]

    def __repr__(self):
        return f"ProbeSet({[p.label for p in self.probes]!r})"

    def with_role(self, role: str) -> List[Probe]:
        return [p for p in self.probes if p.role == role]

    def labels(self) -> List[str]:
        return [p.label for p in self.probes]


@dataclass(frozen=True)
class ContinuumSpec:
    """An exact description of a compact planar set plus its grid family."""

    name: str
    base: int
    bbox: Tuple[Fraction, Fraction, Fraction, Fraction]
    primitives: Tuple[Primitive, ...]
    probes: Tuple[Probe, ...]
    connected: bool = True

    def __post_init__(self):
        bbox = tuple(_frac(v) for v in self.bbox)
        object.__setattr__(self, "bbox", bbox)
        probes = []
        for k, p in enumerate(self.probes):
            if not isinstance(p, Probe):
                p = Probe(f"p{k}", p)
            probes.append(p)
        object.__setattr__(self, "probes", tuple(probes))
        object.__setattr__(self, "primitives", tuple(self.primitives))

    def probe_set(self) -> ProbeSet:
        return ProbeSet(self.probes)

    def grid(self, level: int) -> GridSpec:
        return GridSpec(self.base, level, self.bbox)

    def active_primitives(self, grid: GridSpec) -> List[Primitive]:
        h = grid.h
        return [p for p in self.primitives
                if p.feature_scale is None or p.feature_scale >= h]

    def anchor_in_cell(self, grid: GridSpec, i: int, j: int,
                       prefer_coord: Optional[Tuple[int, Fraction]] = None,
                       cells=None) -> Optional[Point]:
        """An exact ideal point inside a cell's closed square.

        Preference order: a designated probe in the cell; a point sharing
        ``prefer_coord`` (axis, value) with the probe under study; any
        primitive point. Candidates on a shared gridline are deferred to
        ones this cell owns under the below-left edge rule (pass the
        raster's flat-index set as ``cells`` to break ties the way a
        membership-aware snap would); with nothing owned, the first
        candidate is still returned. Returns None for cells the ideal
        set misses, which indicates a rasterization bug.
        """
        box = grid.cell_box(i, j)
        bx0, by0, bx1, by1 = box

        def owned(p) -> bool:
            cands = grid.cells_containing(p)
            if cells is not None:
                cands = [c for c in cands if grid.flat(*c) in cells]
            return bool(cands) and min(cands) == (i, j)

        def candidates():
            for q in self.probes:
                p = q.point
                if bx0 <= p[0] <= bx1 and by0 <= p[1] <= by1:
                    yield p
            prims = self.active_primitives(grid)
            if prefer_coord is not None:
                axis, coord = prefer_coord
                for prim in prims:
                    got = prim.point_on_line(axis, coord, box)
                    if got is not None:
                        yield got
            for prim in prims:
                got = prim.point_in_box(box)
                if got is not None:
                    yield got

        first = None
        for p in candidates():
            if first is None:
                first = p
            if owned(p):
                return p
        return first
