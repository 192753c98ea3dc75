"""Cross-resolution fiber approximation.

A finite cut that separates two cells at one resolution can be an artifact
of that resolution: structure invisible at cell size h may break the wall
once the grid refines.  This module classifies target cells against a
probe by re-examining every separation witness at finer levels.  A witness
survives only if removing a ball around its cells, of radius shrinking
with the level, still parts the two sides; a witness whose required radius
stalls at a fixed length is refuted.  Targets whose witnesses are all
refuted, or whose cut values outgrow the budget, belong to the probe's
fiber at this resolution.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from contfiber import _kernels as kernels
from contfiber.cellset import CellSet
from contfiber.geometry import Probe, ProbeSet
from contfiber.grid import Point
from contfiber.separation import (
    NOT_SEPARABLE,
    SEPARABLE,
    CutResult,
    min_boundary_cut,
)

IN_FIBER = "IN_FIBER"
UNDECIDED = "UNDECIDED"
# SEPARABLE is shared with the separation module

TRIVIAL = "TRIVIAL"
NONTRIVIAL = "NONTRIVIAL"

EXCEEDED = ">k_max"
SELF = "self"
NEAR = "near"
INTERIOR = "interior"

# How many refuted walls to tolerate per level before concluding that no
# persistent cut exists there.
WALL_CAP = 24
# Finer levels consulted to judge one witness.
SCREEN_WINDOW = 2
# A surviving witness must shrink its sever radius by at least
# SHRINK_NUM/SHRINK_DEN per level; real cuts shrink by 1/base.
SHRINK_NUM, SHRINK_DEN = 2, 3
# Sever-radius cap, in cells of the witness's own level.
RADIUS_CAP = 4
# Quantization of ball centers, in half-cells of the screening level.
_RQ = 64
# Largest per-camp candidate count enumerated block by block during
# screening; bigger camps pay one whole-level gather instead.
_SEED_BUDGET = 65536
# Bound on retained per-cut side maps (each is a grid-sized array).
_SIDE_CACHE_CAP = 64

_REAL, _FAKE, _SHORT = "real", "fake", "short"


class LevelUnavailable(ValueError):
    """Raised by families that cannot produce cells at a finer level."""


def default_k_max(level: int) -> int:
    return 4 + level


def _k_policy(k_max):
    if k_max is None:
        return default_k_max
    if isinstance(k_max, int):
        return lambda n: k_max
    if isinstance(k_max, dict):
        return lambda n: k_max[n]
    return k_max


def _resolve_probe(fam, probe) -> Probe:
    if isinstance(probe, Probe):
        return probe
    if isinstance(probe, str):
        return fam.probes[probe]
    pt = (Fraction(probe[0]), Fraction(probe[1]))
    return Probe(label=f"at({pt[0]},{pt[1]})", point=pt)


def _level_graph(fam, level: int, mode: str) -> CellSet:
    X = fam.at_level(level)
    return X.boundary() if mode == "boundary" else X


def _cut_query(fam, mode: str, level: int, fx: int, fy: int, k_max: int,
               forbid: Tuple[int, ...] = ()) -> CutResult:
    memo = fam.cache("cut_queries")
    key = (mode, level, fx, fy, k_max, forbid)
    got = memo.get(key)
    if got is None:
        got = min_boundary_cut(fam.at_level(level), fx, fy, k_max=k_max,
                               separate_in=mode, forbid=forbid)
        memo[key] = got
    return got


# -- witness screening ----------------------------------------------------

def _side_map(fam, mode: str, n_star: int, cut: Tuple[int, ...]):
    """Witness-level component labels with the cut removed, as a grid-sized
    int32 array (-1 off the graph), plus per-label cell counts.  The cache
    is a bounded FIFO; entries are a couple of MB on fine grids and the
    distinct cuts of one run can number in the thousands."""
    memo = fam.cache("cut_sides")
    key = (mode, n_star, cut)
    got = memo.get(key)
    if got is None:
        rest = _level_graph(fam, n_star, mode).difference(cut)
        indptr, indices = rest.csr()
        labels = kernels.label_components(len(rest.order), indptr, indices)
        S = fam.grid(n_star).size
        side_of = np.full(S * S, -1, np.int32)
        side_of[rest.order] = labels
        counts = np.bincount(labels) if len(labels) else np.zeros(1, np.int64)
        got = (side_of, counts)
        while len(memo) >= _SIDE_CACHE_CAP:
            memo.pop(next(iter(memo)))
        memo[key] = got
    return got


def _fine_coords(fam, mode: str, m: int):
    """(order, i, j) arrays of the level-m separation graph."""
    memo = fam.cache("fine_coords")
    got = memo.get((mode, m))
    if got is None:
        order = _level_graph(fam, m, mode).order
        s = fam.grid(m).size
        got = (order, (order % s).astype(np.int32),
               (order // s).astype(np.int32))
        memo[(mode, m)] = got
    return got


def _anc_map(fam, mode: str, n_star: int, m: int):
    """Level-n_star ancestor flat id of every level-m graph node."""
    memo = fam.cache("anc_maps")
    key = (mode, n_star, m)
    got = memo.get(key)
    if got is None:
        order, im, jm = _fine_coords(fam, mode, m)
        s_star = fam.grid(n_star).size
        factor = fam.grid(m).size // s_star
        got = ((jm.astype(np.int64) // factor) * s_star
               + im // factor).astype(np.int32)
        memo[key] = got
    return got


def _camp_nodes(fam, mode: str, n_star: int, m: int, side_of, lab: int,
                star_cnt: int, factor: int) -> np.ndarray:
    """Level-m graph nodes whose ancestor carries the given side label.

    Small camps are enumerated by walking their coarse blocks; a large
    camp falls back to one gather over the whole level, which is the
    price of asking about a side that a blocking ball can never swallow
    anyway.
    """
    order, _, _ = _fine_coords(fam, mode, m)
    if star_cnt * factor * factor <= _SEED_BUDGET:
        s_m = fam.grid(m).size
        s_star = fam.grid(n_star).size
        star_flats = np.nonzero(side_of == lab)[0]
        si = (star_flats % s_star) * factor
        sj = (star_flats // s_star) * factor
        d = np.arange(factor, dtype=np.int64)
        ii = si[:, None, None] + d[None, None, :]
        jj = sj[:, None, None] + d[None, :, None]
        cand = (jj * s_m + ii).ravel()
        p = np.searchsorted(order, cand)
        p_safe = np.minimum(p, len(order) - 1)
        ok = (p < len(order)) & (order[p_safe] == cand)
        return p[ok].astype(np.int64)
    lab_of = side_of[_anc_map(fam, mode, n_star, m)]
    return np.nonzero(lab_of == lab)[0].astype(np.int64)


def _sever_radius(linked, cap_k: int) -> Optional[int]:
    """Smallest k (fine-level cells) such that deleting the radius k*h_m
    ball around the witness parts the two sides while leaving both alive,
    or None when no such radius exists up to cap_k."""
    if cap_k < 1 or linked(cap_k) == 1:
        return None
    lo, hi = 1, cap_k
    while lo < hi:
        mid = (lo + hi) // 2
        if linked(mid) != 1:
            hi = mid
        else:
            lo = mid + 1
    if linked(lo) != 0:
        return None  # the ball swallowed a side; larger balls only worsen it
    return lo


def _screen_witness(fam, mode: str, n_star: int, cut: Tuple[int, ...],
                    fx: int, fy: int) -> Tuple[str, Optional[int]]:
    """Judge one separation witness against the next SCREEN_WINDOW levels.

    Returns (verdict, jump): verdict is "real" when shrinking balls keep
    the sides apart, "fake" when the sever radius stalls or nothing works
    (jump is the stall extent in witness-level cells, for the retry to
    step over), or "short" when finer cells are unavailable to judge with.
    """
    if not cut:
        return _REAL, None  # value-0 separations have nothing to refute
    side_of, star_counts = _side_map(fam, mode, n_star, cut)
    la = int(side_of[fx])
    lb = int(side_of[fy])
    if la < 0 or lb < 0 or la == lb:
        raise ValueError("witness does not separate its endpoints")
    side_key = (min(la, lb), max(la, lb))
    memo = fam.cache("screen")
    key = (mode, n_star, cut, side_key)
    got = memo.get(key)
    if got is not None:
        return got

    grid_s = fam.grid(n_star)
    s_star = grid_s.size
    # Balls are centered on a point of the continuum inside each witness
    # cell, not on the cell's center: a cut hugging one cell edge recedes
    # from the center as levels refine, and a real cut would then need a
    # non-shrinking radius and be thrown out with the fakes.
    x0b, y0b, x1b, _ = grid_s.bbox
    span = x1b - x0b
    half = Fraction(1, 2)
    anchors = []
    for f in cut:
        ij = grid_s.unflat(f)
        p = fam.anchor_point(n_star, ij)
        if p is None:
            p = grid_s.cell_center(*ij)
        anchors.append(((Fraction(p[0]) - x0b) / span,
                        (Fraction(p[1]) - y0b) / span))

    result: Tuple[str, Optional[int]] = (_REAL, None)
    prev_k: Optional[int] = None
    for m in range(n_star + 1, n_star + SCREEN_WINDOW + 1):
        try:
            Gm = _level_graph(fam, m, mode)
        except LevelUnavailable:
            result = (_SHORT, None)
            break
        grid_m = fam.grid(m)
        s_m = grid_m.size
        factor = s_m // s_star
        order, im, jm = _fine_coords(fam, mode, m)
        # all-integer geometry in units of span / (2 * s_m * _RQ); the
        # quantization error of a ball center is h_m / (4 * _RQ), far
        # below the radius gap the shrink test has to resolve
        unit = 2 * s_m * _RQ
        ux = np.fromiter((int(a[0] * unit + half) for a in anchors),
                         np.int64, len(anchors))
        uy = np.fromiter((int(a[1] * unit + half) for a in anchors),
                         np.int64, len(anchors))
        # the sever radius must shrink decisively level over level:
        # 3*k <= 2*prev_k*base <=> r_m <= (2/3) r_{m-1}; folding the
        # bound into the search cap makes a stall cost one flood
        cap = RADIUS_CAP * factor
        if prev_k is not None:
            cap = min(cap, (prev_k * grid_m.base * SHRINK_NUM)
                      // SHRINK_DEN)
        # distances are only materialized inside a window around the
        # anchors; no ball up to the cap can block anything outside it
        pad = 2 * (cap + 1) * _RQ
        lo_i = (int(ux.min()) - pad) // (2 * _RQ)
        hi_i = (int(ux.max()) + pad) // (2 * _RQ)
        lo_j = (int(uy.min()) - pad) // (2 * _RQ)
        hi_j = (int(uy.max()) + pad) // (2 * _RQ)
        wsel = (im >= lo_i) & (im <= hi_i) & (jm >= lo_j) & (jm <= hi_j)
        widx = np.nonzero(wsel)[0].astype(np.int64)
        cx = (2 * im[widx].astype(np.int64) + 1) * _RQ
        cy = (2 * jm[widx].astype(np.int64) + 1) * _RQ
        d2w = np.full(len(widx), np.iinfo(np.int64).max, np.int64)
        for a in range(len(ux)):
            dk = (cx - ux[a]) ** 2 + (cy - uy[a]) ** 2
            np.minimum(d2w, dk, out=d2w)

        cnt_a = int(star_counts[la])
        cnt_b = int(star_counts[lb])
        if cnt_a <= cnt_b:
            src_lab, dst_lab, src_cnt, dst_cnt = la, lb, cnt_a, cnt_b
        else:
            src_lab, dst_lab, src_cnt, dst_cnt = lb, la, cnt_b, cnt_a
        seeds = _camp_nodes(fam, mode, n_star, m, side_of, src_lab,
                            src_cnt, factor)
        dst_seeds = _camp_nodes(fam, mode, n_star, m, side_of, dst_lab,
                                dst_cnt, factor)
        if len(seeds) == 0 or len(dst_seeds) == 0:
            result = (_SHORT, None)
            break
        indptr, indices = Gm.csr()
        probes: Dict[int, int] = {}

        def linked(k: int) -> int:
            got = probes.get(k)
            if got is None:
                rho = 2 * k * _RQ
                got = int(kernels.sides_linked(
                    len(order), indptr, indices, order, s_m, factor,
                    s_star, side_of, dst_lab, widx, d2w, rho * rho,
                    seeds, dst_seeds))
                probes[k] = got
            return got

        k = _sever_radius(linked, cap)
        if k is None:
            lam = max(2, -(-(cap + 1) // factor))
            result = (_FAKE, min(lam, RADIUS_CAP))
            break
        prev_k = k

    memo[key] = result
    return result


# -- per-pair, per-level behavior -----------------------------------------

def _effective_level(fam, mode: str, n: int, fx: int, fy: int, k_max: int):
    """Persistent separation behavior of one pair at one level.

    Returns (kind, raw, settled): kind is "real" (a witness survived
    screening; settled is that CutResult), "exceed" (no cut fits the
    budget, or every wall within WALL_CAP was refuted), or "inconclusive"
    (screening ran out of levels).  raw is the unretried query for the
    report matrix.
    """
    raw = _cut_query(fam, mode, n, fx, fy, k_max)
    if raw.status == NOT_SEPARABLE:
        return "exceed", raw, None
    if raw.value == 0:
        return "real", raw, raw

    # the returned min cut hugs the flow source, so alternating the
    # orientation marches candidate walls in from both endpoints; only
    # the refuted wall itself is forbidden, since anything wider can
    # swallow the genuine cut locus sitting one cell past a fake wall
    forbid: set = set()
    res = raw
    src, dst = fx, fy
    for _ in range(WALL_CAP):
        verdict, _jump = _screen_witness(fam, mode, n, res.cut, fx, fy)
        if verdict == _REAL:
            return "real", raw, res
        if verdict == _SHORT:
            return "inconclusive", raw, None
        forbid.update(int(f) for f in res.cut)
        src, dst = dst, src
        res = _cut_query(fam, mode, n, src, dst, k_max,
                         forbid=tuple(sorted(forbid)))
        if res.status == NOT_SEPARABLE:
            return "exceed", raw, None
        if res.value == 0:
            raise AssertionError("forbidding cut cells cannot disconnect")
    return "exceed", raw, None


@dataclass(frozen=True)
class FiberTarget:
    level: int
    cell: Tuple[int, int]
    anchor: Point

    @property
    def key(self) -> str:
        return f"{self.level}:{self.cell[0]},{self.cell[1]}"


@dataclass(frozen=True)
class TargetVerdict:
    state: str
    level: Optional[int] = None
    value: Optional[int] = None
    cut: Tuple[int, ...] = ()
    # True when no level produced a definite outcome: the pair shared or
    # touched a cell, or ran out of screening room, everywhere
    starved: bool = False


def _classify_pair(fam, mode: str, levels: Sequence[int], probe_pt: Point,
                   anchor: Point, kpol) -> Tuple[Dict[int, object],
                                                 TargetVerdict]:
    """Raw cut values per level, plus a verdict from the finest window.

    The pair is judged on the last three levels where probe and target
    occupy distinct, non-touching cells.  Cells nest, so the ladder reads
    as shared cells, then touching cells, then genuinely separated ones;
    a cut between touching cells does not exist in any adjacency graph,
    so those levels cannot pose the separation question and are skipped
    rather than misread as budget blowups.  Coarser separated levels only
    contribute their raw value to the report matrix.  Witness screening upgrades each judged level to
    "a cut persists here", "the budget is exceeded / every wall refuted",
    or "inconclusive"; inconclusive levels are dropped and the remaining
    outcomes read like a refinement trace: stable persistent values mean
    a resolution-stable cut, growth that runs past the budget means the
    target clings to the probe, and anything backwards stays undecided.
    """
    row: Dict[int, object] = {}
    pairs: List[Tuple[int, int, int]] = []
    for n in levels:
        X = fam.at_level(n)
        cx = X.snap(probe_pt)
        cy = X.snap(anchor)
        if cx == cy:
            row[n] = SELF
            continue
        di = abs(cx[0] - cy[0])
        dj = abs(cx[1] - cy[1])
        G = _level_graph(fam, n, mode)
        if (max(di, dj) == 1) if G.connectivity == 8 else (di + dj == 1):
            row[n] = NEAR
            continue
        fx = X.grid.flat(*cx)
        fy = X.grid.flat(*cy)
        if fx not in G.cells or fy not in G.cells:
            # a cell buried inside a thick patch has no presence in the
            # boundary complex, so the question is unposeable there too
            row[n] = INTERIOR
            continue
        pairs.append((n, fx, fy))

    if not pairs:
        return row, TargetVerdict(UNDECIDED, starved=True)
    tail = pairs[-min(3, len(pairs)):]
    for n, fx, fy in pairs[:len(pairs) - len(tail)]:
        raw = _cut_query(fam, mode, n, fx, fy, kpol(n))
        row[n] = EXCEEDED if raw.status == NOT_SEPARABLE else raw.value

    outcomes: List[Tuple[int, str, Optional[CutResult]]] = []
    for n, fx, fy in tail:
        kind, raw, settled = _effective_level(fam, mode, n, fx, fy, kpol(n))
        row[n] = EXCEEDED if raw.status == NOT_SEPARABLE else raw.value
        if kind != "inconclusive":
            outcomes.append((n, kind, settled))
    return row, _verdict_from(outcomes)


def _verdict_from(outcomes) -> TargetVerdict:
    if not outcomes:
        return TargetVerdict(UNDECIDED, starved=True)
    reals = [(n, s) for n, k, s in outcomes if k == "real"]
    if not reals:
        return TargetVerdict(IN_FIBER)
    values = [s.value for _, s in reals]
    increasing = all(a < b for a, b in zip(values, values[1:]))
    trailing = 0
    for _, k, _ in reversed(outcomes):
        if k != "real":
            break
        trailing += 1
    if trailing == 0:
        # every poseable level was followed by budget blowups; growth up
        # to that point reads as clinging, anything else stays open
        return TargetVerdict(IN_FIBER) if increasing \
            else TargetVerdict(UNDECIDED)
    # separability is judged on the trailing run of survivor cuts: a cut
    # locus can collide with the probe's cell at coarse levels (the cut
    # query is then unposeable and exceeds honestly), so an exceed
    # followed by stable survivors is refinement, not contradiction
    tailvals = values[len(values) - trailing:]
    if all(v == tailvals[0] for v in tailvals):
        n, s = reals[-1]
        return TargetVerdict(SEPARABLE, level=n, value=s.value, cut=s.cut)
    if len(tailvals) > 1 and all(a < b for a, b in zip(tailvals, tailvals[1:])):
        return TargetVerdict(IN_FIBER)
    # a coarse grid can overstate the cut (the optimal locus may not be
    # representable yet); a value that drops and then repeats has
    # stabilized, so a weakly decreasing tail ending in a repeat settles
    run = 1
    while run < len(tailvals) and tailvals[-run - 1] == tailvals[-1]:
        run += 1
    if run >= 2 and all(v >= tailvals[-1] for v in tailvals):
        n, s = reals[-1]
        return TargetVerdict(SEPARABLE, level=n, value=s.value, cut=s.cut)
    return TargetVerdict(UNDECIDED)


# -- the fiber map --------------------------------------------------------

@dataclass
class FiberReport:
    """Classification of finest-level cells against one probe.

    ``fiber_cells`` is the committed fiber estimate: cells shown
    inseparable from the probe (``in_fiber_cells``) plus the probe's
    halo of ``starved_cells``, whose anchors share or touch the probe's
    cell at every level and so can never be posed a separation query.
    Genuinely contested cells stay in ``undecided_cells`` (a superset of
    the starved ones), outside the estimate; consumers that must not
    over-claim separation should treat them as possible fiber material.
    ``in_fiber_connected`` checks ``fiber_cells`` against the invariant
    that a fiber is a single component.
    """

    family: str
    probe: Probe
    levels: Tuple[int, ...]
    separate_in: str
    k_max: Dict[int, int]
    targets: Tuple[FiberTarget, ...]
    matrix: Dict[str, Dict[int, object]]
    classification: Dict[str, TargetVerdict]
    probe_cell: Tuple[int, int]
    probe_interior: bool
    fiber_cells: CellSet
    in_fiber_cells: CellSet
    undecided_cells: CellSet
    starved_cells: CellSet
    in_fiber_connected: bool

    @property
    def n_min(self) -> int:
        return self.levels[0]

    @property
    def n_max(self) -> int:
        return self.levels[-1]

    def states(self) -> Dict[str, str]:
        return {k: v.state for k, v in self.classification.items()}

    def verdict_of(self, ij: Tuple[int, int]) -> Optional[TargetVerdict]:
        """Effective verdict for a finest-level cell, honoring refinement."""
        fine = f"{self.n_max}:{ij[0]},{ij[1]}"
        if fine in self.classification:
            return self.classification[fine]
        gmax = self.fiber_cells.grid
        gmin = gmax.with_level(self.n_min)
        ai, aj = gmax.ancestor_of(ij[0], ij[1], gmin)
        return self.classification.get(f"{self.n_min}:{ai},{aj}")

    def state_of(self, ij: Tuple[int, int]) -> Optional[str]:
        if tuple(ij) == self.probe_cell:
            return IN_FIBER
        v = self.verdict_of(ij)
        return v.state if v is not None else None


def fiber_at(fam, probe, levels: Sequence[int], k_max=None,
             separate_in: str = "boundary", targets=None,
             refine: bool = True) -> FiberReport:
    """Classify cells of the family against a probe point.

    ``levels`` is the resolution ladder; at least 3 levels are required.
    Targets default to every separation-graph cell at the coarsest level;
    blocks on classification frontiers and the probe's own block are then
    re-examined cell by cell at the finest level.  Pass ``targets`` (an
    iterable of (level, (i, j)) with level equal to the coarsest or finest
    ladder level) to restrict the sweep.
    """
    levels = tuple(int(n) for n in levels)
    if len(levels) < 3:
        raise ValueError("need at least 3 levels to classify fibers")
    if list(levels) != sorted(set(levels)):
        raise ValueError("levels must be strictly increasing")
    probe = _resolve_probe(fam, probe)
    kpol = _k_policy(k_max)
    mode = separate_in
    n_min, n_max = levels[0], levels[-1]
    prefer = (1, Fraction(probe.point[1]))

    X_max = fam.at_level(n_max)
    probe_cell = X_max.snap(probe.point)
    probe_flat_max = X_max.grid.flat(*probe_cell)
    probe_interior = (mode == "boundary"
                      and probe_flat_max not in X_max.boundary().cells)

    def make_target(level: int, ij: Tuple[int, int]) -> FiberTarget:
        anchor = fam.anchor_point(level, ij, prefer=prefer)
        if anchor is None:
            raise ValueError(
                f"no representative point in cell {ij} at level {level}; "
                "is it a member cell?")
        return FiberTarget(level, ij, anchor)

    explicit = targets is not None
    net: List[FiberTarget] = []
    if explicit:
        for level, ij in targets:
            level = int(level)
            if level not in (n_min, n_max):
                raise ValueError("explicit targets must sit at the coarsest "
                                 "or finest ladder level")
            net.append(make_target(level, (int(ij[0]), int(ij[1]))))
    else:
        G_min = _level_graph(fam, n_min, mode)
        for f in G_min.order:
            net.append(make_target(n_min, G_min.ij(int(f))))

    matrix: Dict[str, Dict[int, object]] = {}
    classification: Dict[str, TargetVerdict] = {}

    def classify(t: FiberTarget):
        row, verdict = _classify_pair(fam, mode, levels, probe.point,
                                      t.anchor, kpol)
        matrix[t.key] = row
        classification[t.key] = verdict

    for t in net:
        classify(t)

    all_targets = list(net)
    if not explicit and refine:
        gmin = fam.grid(n_min)
        gmax = fam.grid(n_max)
        probe_cell_min = fam.at_level(n_min).snap(probe.point)
        G_max = _level_graph(fam, n_max, mode)
        for t in _frontier_blocks(fam, mode, n_min, net, classification,
                                  probe_cell_min):
            for ij in gmin.children_of(*t.cell, finer=gmax):
                f = gmax.flat(*ij)
                if f not in G_max.cells and f != probe_flat_max:
                    continue
                ft = make_target(n_max, ij)
                all_targets.append(ft)
                if ij == probe_cell:
                    matrix[ft.key] = {}
                    classification[ft.key] = TargetVerdict(IN_FIBER)
                else:
                    classify(ft)

    in_fiber, undecided, starved = _assemble_cells(
        fam, mode, levels, all_targets, classification, probe_flat_max)
    union = CellSet(in_fiber.grid, in_fiber.cells | starved.cells,
                    connectivity=in_fiber.connectivity)
    part = union.component_of(probe_flat_max)
    connected = len(part.cells) == len(union.cells)
    return FiberReport(
        family=fam.name, probe=probe, levels=levels, separate_in=mode,
        k_max={n: kpol(n) for n in levels},
        targets=tuple(all_targets), matrix=matrix,
        classification=classification, probe_cell=probe_cell,
        probe_interior=probe_interior, fiber_cells=union,
        in_fiber_cells=in_fiber, undecided_cells=undecided,
        starved_cells=starved, in_fiber_connected=connected,
    )


def _frontier_blocks(fam, mode, n_min, net, classification,
                     probe_cell_min) -> List[FiberTarget]:
    """Coarse blocks worth refining: state boundaries and the probe's own."""
    G_min = _level_graph(fam, n_min, mode)
    gmin = fam.grid(n_min)
    state = {gmin.flat(*t.cell): classification[t.key].state for t in net}
    picked = []
    for t in net:
        if t.cell == probe_cell_min:
            picked.append(t)
            continue
        f = gmin.flat(*t.cell)
        mine = state[f]
        if any(state.get(g, mine) != mine for g in G_min.neighbors(f)):
            picked.append(t)
    return picked


def _assemble_cells(fam, mode, levels, all_targets, classification,
                    probe_flat_max):
    n_min, n_max = levels[0], levels[-1]
    G_max = _level_graph(fam, n_max, mode)
    gmin = fam.grid(n_min)
    gmax = fam.grid(n_max)
    coarse: Dict[int, TargetVerdict] = {}
    fine: Dict[int, TargetVerdict] = {}
    for t in all_targets:
        v = classification[t.key]
        if t.level == n_min:
            coarse[gmin.flat(*t.cell)] = v
        else:
            fine[gmax.flat(*t.cell)] = v
    fiber = {probe_flat_max}
    undecided = set()
    starved = set()
    pi, pj = gmax.unflat(probe_flat_max)
    zone = {gmax.flat(pi + di, pj + dj)
            for di in (-1, 0, 1) for dj in (-1, 0, 1)
            if gmax.in_range(pi + di, pj + dj)}
    for f in G_max.cells:
        if f == probe_flat_max:
            continue
        v = fine.get(f)
        if v is None:
            i, j = gmax.unflat(f)
            v = coarse.get(gmin.flat(*gmax.ancestor_of(i, j, gmin)))
        if v is None:
            continue
        if v.state == IN_FIBER:
            fiber.add(f)
        elif v.state == UNDECIDED:
            undecided.add(f)
            # the starved label only travels to cells that actually hug
            # the probe; a starved coarse block must not smear it around
            if v.starved and f in zone:
                starved.add(f)
    conn = G_max.connectivity
    return (CellSet(gmax, fiber, connectivity=conn),
            CellSet(gmax, undecided, connectivity=conn),
            CellSet(gmax, starved, connectivity=conn))


# -- triviality and recursion ---------------------------------------------

def is_trivial_fiber(report: FiberReport) -> str:
    """TRIVIAL / NONTRIVIAL / UNDECIDED for a fiber report.

    The probe's own 8-neighborhood is excused: single-cell queries can
    never part adjacent cells.  Undecided cells that were resolution
    starved (never distinguishable from the probe for long enough to
    judge) are excused as well; any other undecided cell outside the
    neighborhood blocks a TRIVIAL verdict.
    """
    gmax = report.in_fiber_cells.grid
    pi, pj = report.probe_cell
    zone = set()
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if gmax.in_range(pi + di, pj + dj):
                zone.add(gmax.flat(pi + di, pj + dj))
    if set(report.in_fiber_cells.cells) - zone:
        return NONTRIVIAL
    pending = (set(report.undecided_cells.cells)
               - set(report.starved_cells.cells) - zone)
    if pending:
        return UNDECIDED
    return TRIVIAL


class StageContinuum:
    """A sub-continuum carved out of a parent family, usable as a family.

    Cells are fixed at the finest classified level; coarser levels are the
    ancestor coarsenings.  Levels beyond the finest are unavailable (the
    stage has no ground truth there) and raise LevelUnavailable, which
    witness screening reports as "short".
    """

    def __init__(self, parent, name: str, levels: Sequence[int],
                 cells_max: CellSet, probes: ProbeSet,
                 excluded: Optional[CellSet] = None):
        self.parent = parent
        self._name = name
        self.levels = tuple(levels)
        self.cells_max = cells_max
        self._probes = probes
        self.excluded = excluded
        self._coarse: Dict[int, CellSet] = {self.levels[-1]: cells_max}
        self.caches: Dict[str, dict] = {}

    @property
    def name(self) -> str:
        return self._name

    @property
    def probes(self) -> ProbeSet:
        return self._probes

    def grid(self, level: int):
        return self.parent.grid(level)

    def at_level(self, level: int) -> CellSet:
        n_max = self.levels[-1]
        if level > n_max:
            raise LevelUnavailable(
                f"stage {self._name!r} is resolved only to level {n_max}")
        if level not in self._coarse:
            gmax = self.grid(n_max)
            g = self.grid(level)
            anc = {g.flat(*gmax.ancestor_of(*gmax.unflat(f), g))
                   for f in self.cells_max.cells}
            self._coarse[level] = CellSet(
                g, anc, connectivity=self.cells_max.connectivity)
        return self._coarse[level]

    def probe_cell(self, probe: Probe, level: int) -> Tuple[int, int]:
        return self.at_level(level).snap(probe.point)

    def anchor_point(self, level: int, ij, prefer=None) -> Optional[Point]:
        for cand in (self.parent.anchor_point(level, ij, prefer=prefer),
                     self.parent.anchor_point(level, ij)):
            if cand is not None and self.cells_max.contains_point(cand):
                return cand
        # fall back to the center of the smallest finest-level member cell
        g = self.grid(level)
        gmax = self.grid(self.levels[-1])
        best = None
        for child in g.children_of(ij[0], ij[1], gmax):
            f = gmax.flat(*child)
            if f in self.cells_max.cells and (best is None or f < best):
                best = f
        if best is None:
            return None
        return gmax.cell_center(*gmax.unflat(best))

    def cache(self, kind: str) -> dict:
        return self.caches.setdefault(kind, {})


def _extremal_cells(X: CellSet) -> Tuple[int, int]:
    """A deterministic farthest pair of member cells (flat ids)."""
    pts = [(X.center(f), f) for f in sorted(X.cells)]
    if len(pts) > 600:
        # thin out, keeping the tail cell so ends stay representable
        stride = max(1, len(pts) // 600)
        head = pts[::stride]
        if head[-1] != pts[-1]:
            head.append(pts[-1])
        pts = head
    best = None
    for a in range(len(pts)):
        (xa, ya), fa = pts[a]
        for b in range(a + 1, len(pts)):
            (xb, yb), fb = pts[b]
            d = (xa - xb) ** 2 + (ya - yb) ** 2
            if best is None or d > best[0]:
                best = (d, fa, fb)
    if best is None:
        f = min(X.cells)
        return f, f
    return best[1], best[2]


def fiber_as_continuum(fam, report: FiberReport,
                       name: Optional[str] = None) -> StageContinuum:
    """Package a nontrivial fiber as a family of its own for recursion."""
    if is_trivial_fiber(report) == TRIVIAL:
        raise ValueError("trivial fiber has no continuum to extract")
    cells = report.fiber_cells
    fa, fb = _extremal_cells(cells)
    probes = [report.probe]
    seen = {report.probe.point}
    for tag, f in (("end_0", fa), ("end_1", fb)):
        pt = cells.center(f)
        if pt not in seen:
            probes.append(Probe(label=tag, point=pt, role="fiber_end"))
            seen.add(pt)
    return StageContinuum(
        parent=fam,
        name=name or f"{fam.name}/fiber@{report.probe.label}",
        levels=report.levels,
        cells_max=cells,
        probes=ProbeSet(probes),
        excluded=report.undecided_cells,
    )


# -- pushforward ----------------------------------------------------------

@dataclass(frozen=True)
class ProbeTransfer:
    probe: Probe
    image_point: Point
    checked: int
    violations: Tuple[Tuple[Tuple[int, int], Tuple[int, int]], ...]


@dataclass
class PushforwardReport:
    map_kind: str
    source: str
    target: str
    transfers: Tuple[ProbeTransfer, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(not t.violations for t in self.transfers)

    @property
    def total_violations(self) -> int:
        return sum(len(t.violations) for t in self.transfers)


def _resolve_map(f):
    if callable(f):
        return "custom", f
    kind = f["kind"]
    if kind == "identity":
        return kind, lambda p: p
    if kind == "fold":
        return kind, lambda p: (abs(Fraction(p[0])), Fraction(p[1]))
    if kind == "scale":
        c = Fraction(f.get("factor", Fraction(1, 2)))
        return kind, lambda p: (Fraction(p[0]) * c, Fraction(p[1]) * c)
    raise ValueError(f"unknown map kind {kind!r}")


def pushforward_check(f, src_fam, dst_fam, probes,
                      levels: Sequence[int],
                      dst_levels: Optional[Sequence[int]] = None,
                      k_max=None, separate_in: str = "boundary",
                      reports: Optional[dict] = None) -> PushforwardReport:
    """Check that fibers map into fibers under a pointwise map.

    For each probe x of ``src_fam``, every finest-level fiber cell of x
    must land, under f, in a cell of ``dst_fam`` classified IN_FIBER or
    UNDECIDED for the image probe f(x).  ``reports`` may carry precomputed
    FiberReports keyed ("src", label) / ("dst", label); it is filled in
    either way so callers can reuse the runs.
    """
    kind, fn = _resolve_map(f)
    dst_levels = tuple(dst_levels) if dst_levels is not None else tuple(levels)
    reports = reports if reports is not None else {}
    transfers = []
    for probe in probes:
        probe = _resolve_probe(src_fam, probe)
        rx = reports.get(("src", probe.label))
        if rx is None:
            rx = fiber_at(src_fam, probe, levels, k_max=k_max,
                          separate_in=separate_in)
            reports[("src", probe.label)] = rx
        q = fn(probe.point)
        image = Probe(label=f"{probe.label}->", point=q)
        ry = reports.get(("dst", image.label))
        if ry is None:
            ry = fiber_at(dst_fam, image, dst_levels, k_max=k_max,
                          separate_in=separate_in)
            reports[("dst", image.label)] = ry
        # anything not positively separated on the image side is tolerated
        ok_cells = set(ry.fiber_cells.cells) | set(ry.undecided_cells.cells)
        Y_max = dst_fam.at_level(ry.n_max)
        gx = rx.fiber_cells.grid
        violations = []
        checked = 0
        for cf in sorted(rx.fiber_cells.cells):
            ij = gx.unflat(cf)
            p = src_fam.anchor_point(rx.n_max, ij)
            if p is None:
                p = gx.cell_center(*ij)
            try:
                img_cell = Y_max.snap(fn(p))
            except ValueError:
                violations.append((ij, (-1, -1)))
                continue
            checked += 1
            if Y_max.grid.flat(*img_cell) not in ok_cells:
                violations.append((ij, img_cell))
        transfers.append(ProbeTransfer(probe, q, checked, tuple(violations)))
    return PushforwardReport(kind, src_fam.name, dst_fam.name,
                             tuple(transfers))
