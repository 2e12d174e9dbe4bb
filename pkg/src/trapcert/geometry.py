"""Layered and stacked packings of open boxes with certified summaries.

The layered arrangement places, on level i at height H_i <= 0, a grid of
floor(i ln(i+e))^(n-1) boxes: columns at pitch h_i = L_i + d_i/ln(i+e) along
each horizontal axis, where L_i is the sidelength of the first (largest) box
of the level.  Heights recurse by H_{i+1} = H_i - ell_{B_{i+1}} - d_i, so
consecutive levels are separated by exactly d_i while levels keep shrinking
and accumulate at a finite depth.  The stacked arrangement is the simpler
single-column variant t_{j+1} = t_j - (ell_{j+1} + d_j) e_n, which requires
summable 1/k_j and is therefore only available for explicit wavenumber
tables.

Everything downstream hangs off two kinds of guarantees produced here:

* exact structural certificates (pairwise closure-disjointness by strict
  coordinate comparison, quantitative gap floors, connectivity facts), and
* enclosures for the quantities of the infinite object (depth of the
  accumulation point, total volume, circumradius), obtained by computing a
  few hundred levels explicitly and bounding the remainder analytically.

All coordinates are plain binary64 and every emitted number is a fixed
arithmetic expression of schedule values, so rebuilding with the same
configuration reproduces the geometry bit for bit.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from trapcert.sequences import (
    DShiftedPower,
    KLogGrowth,
    KTable,
    Schedule,
    ScheduleError,
    derived_params,
    padding,
    padding_tail_bound,
    sidelength,
    volume_tail_bound,
)

# the analytic layer-tail bounds below are proved for level indices >= 26;
# extending at least this far also puts the slowly-decaying prefactors well
# into their monotone regime
_MIN_EXTENSION = 256


class GeometryError(ValueError):
    """Construction or certification cannot proceed as requested."""


class ResolutionTooCoarseError(GeometryError):
    """Raster resolution cannot resolve the narrowest geometric feature."""


# -------------------------------------------------------------------
# layer plans
# -------------------------------------------------------------------

@dataclass(frozen=True)
class LayerPlan:
    """Derived data of level i: grid shape, indices, height, and pitch."""

    i: int
    count: int
    start_index: int
    height: float
    max_side: float
    pitch: float
    cols: int
    width: float


@dataclass(frozen=True)
class BoxSpec:
    """One open box: global index, owning level, geometry, and the
    schedule values it certifies (aperture fraction, wavenumber, target)."""

    j: int
    layer: int
    side: float
    translation: Tuple[float, ...]
    gap: float
    wavenumber: float
    target: float

    def bounds(self) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
        lo = self.translation
        return lo, tuple(c + self.side for c in lo)


@dataclass(frozen=True)
class GeometrySummary:
    """Certified global data: exact values for the built truncation plus
    enclosures ([lo, hi] pairs) for the infinite arrangement's depth and
    volume, and an upper bound on its circumradius."""

    dimension: int
    layout: str
    box_count: int
    horizontal_extent: float
    height_interval: Tuple[float, float]
    volume_interval: Tuple[float, float]
    r_gamma_upper: float


def _columns(i: int) -> int:
    return int(math.floor(i * math.log(i + math.e)))


def _iter_plans(sched: Schedule) -> Iterator[LayerPlan]:
    """Yield layer plans in order until the schedule can no longer supply a
    complete level (finite tables) or forever (parametric families)."""
    n = sched.n
    b = 1
    h = 0.0
    i = 1
    while True:
        cols = _columns(i)
        count = cols ** (n - 1)
        try:
            ell_b = sidelength(sched, b)
            d_i = padding(sched, i)
            sidelength(sched, b + count - 1)  # the whole level must exist
        except ScheduleError:
            return
        pitch = ell_b + d_i / math.log(i + math.e)
        yield LayerPlan(i=i, count=count, start_index=b, height=h,
                        max_side=ell_b, pitch=pitch, cols=cols,
                        width=cols * pitch)
        try:
            ell_next = sidelength(sched, b + count)
        except ScheduleError:
            return
        h = h - ell_next - d_i
        b += count
        i += 1


def layer_plan(sched: Schedule, i: int) -> LayerPlan:
    """Plan of level i (heights are cumulative, so levels 1..i-1 are
    evaluated on the way)."""
    if i < 1:
        raise GeometryError(f"layer index must be >= 1, got {i}")
    for plan in _iter_plans(sched):
        if plan.i == i:
            return plan
    raise ScheduleError(f"schedule tables cannot supply layer {i}")


def iter_layer_plans(sched: Schedule, limit: int) -> Iterator[LayerPlan]:
    """The first `limit` level plans in order, one pass over the heights."""
    if limit < 1:
        raise GeometryError(f"limit must be >= 1, got {limit}")
    for plan in _iter_plans(sched):
        yield plan
        if plan.i == limit:
            return
    raise ScheduleError(f"schedule tables cannot supply layer {limit}")


# -------------------------------------------------------------------
# analytic layer tails (log-growth wavenumbers + shifted-power paddings)
# -------------------------------------------------------------------

def _layer_tail_constants(sched: Schedule) -> Tuple[float, float]:
    """(A_n, C_n) for the level-start lower bound B_i >= A_n i^n ln^(n-1) i.

    Chain, valid for i >= 26: a level j >= i/2 contributes at least
    (0.9 j ln j)^(n-1) boxes once j ln j >= 10, there are at least i/2 such
    levels below i, and j >= 0.45 i with ln j >= ln(i)/2 turn this into the
    stated power bound with A_n = 0.2025^(n-1)/2.  Feeding B_i into the
    growth floor then gives  ell_{B_i} <= pi sqrt(n)/(c C_n i ln i ln^2 ln i)
    with C_n = (A_n n/2)^(1/n), provided (n/2) ln i >= ln(1/A_n); index 26
    covers that threshold for every n >= 2.
    """
    n = sched.n
    a_n = 0.2025 ** (n - 1) / 2.0
    c_n = (a_n * n / 2.0) ** (1.0 / n)
    return a_n, c_n


def _level_side_tail(sched: Schedule, m: int) -> float:
    """Upper bound on sum_{i>m} ell_{B_i} for the parametric families."""
    assert m >= _MIN_EXTENSION
    _, c_n = _layer_tail_constants(sched)
    c = sched.k_family.c
    return math.pi * math.sqrt(sched.n) / (c * c_n * math.log(math.log(m)))


def _width_tail_bound(sched: Schedule, i0: int) -> float:
    """Upper bound on sup_{i>=i0} of the level width cols_i * h_i."""
    assert i0 > _MIN_EXTENSION
    _, c_n = _layer_tail_constants(sched)
    c = sched.k_family.c
    d = sched.d_family
    ell_part = (math.pi * math.sqrt(sched.n) * math.log(i0 + math.e)
                / (c * c_n * math.log(i0) * math.log(math.log(i0)) ** 2))
    d_part = d.amplitude * i0 * (i0 + d.shift) ** (-d.exponent)
    return ell_part + d_part


# -------------------------------------------------------------------
# builders
# -------------------------------------------------------------------

def _grid_digits(r: int, cols: int, axes: int) -> Tuple[int, ...]:
    digits = []
    for a in range(axes):
        digits.append((r // cols ** (axes - 1 - a)) % cols)
    return tuple(digits)


def _layered_boxes(sched: Schedule, plans: Sequence[LayerPlan]) -> List[BoxSpec]:
    n = sched.n
    boxes: List[BoxSpec] = []
    for plan in plans:
        for r in range(plan.count):
            j = plan.start_index + r
            p = derived_params(sched, j)
            digits = _grid_digits(r, plan.cols, n - 1)
            t = tuple(plan.pitch * dig for dig in digits) + (plan.height,)
            boxes.append(BoxSpec(j=j, layer=plan.i, side=p.ell, translation=t,
                                 gap=p.eps, wavenumber=p.k, target=p.a))
    return boxes


def build_layered(sched: Schedule, layers: int) -> Tuple[List[BoxSpec], GeometrySummary]:
    """Boxes of the first `layers` levels, in global index order, plus the
    certified summary of the full (possibly infinite) arrangement."""
    if layers < 1:
        raise GeometryError(f"layers must be >= 1, got {layers}")
    infinite = (isinstance(sched.k_family, KLogGrowth)
                and isinstance(sched.d_family, DShiftedPower))
    target = max(layers + 1, _MIN_EXTENSION) if infinite else None

    plans: List[LayerPlan] = []
    for plan in _iter_plans(sched):
        plans.append(plan)
        if target is not None and plan.i >= target:
            break
    if len(plans) < layers:
        raise ScheduleError(
            f"schedule tables support only {len(plans)} complete layers, "
            f"{layers} requested"
        )

    boxes = _layered_boxes(sched, plans[:layers])
    j_built = plans[layers - 1].start_index + plans[layers - 1].count - 1
    j_all = plans[-1].start_index + plans[-1].count - 1
    m_ext = plans[-1].i

    if infinite:
        d_tail = padding(sched, m_ext) + padding_tail_bound(sched, m_ext)
        ell_tail = _level_side_tail(sched, m_ext)
        h_lo = plans[-1].height - ell_tail - d_tail
        h_hi = plans[-1].height
        if j_built >= 3:
            vol_tail = volume_tail_bound(sched, j_built)
        else:
            vol_tail = (math.fsum(sidelength(sched, j) ** sched.n
                                  for j in range(j_built + 1, 4))
                        + volume_tail_bound(sched, 3))
        w_big = max(max(p.width for p in plans),
                    _width_tail_bound(sched, m_ext + 1))
    else:
        # finite tables: every placeable level is in `plans`, so the deepest
        # level height and the full finite sums are exact
        h_lo = h_hi = plans[-1].height
        vol_tail = math.fsum(sidelength(sched, j) ** sched.n
                             for j in range(j_built + 1, j_all + 1))
        w_big = max(p.width for p in plans)

    vol_lo = math.fsum(b.side ** sched.n for b in boxes)
    top = boxes[0].side  # layer 1 box spans [0, ell_1] vertically
    summary = GeometrySummary(
        dimension=sched.n,
        layout="layered",
        box_count=len(boxes),
        horizontal_extent=max(p.width for p in plans),
        height_interval=(h_lo, h_hi),
        volume_interval=(vol_lo, vol_lo + vol_tail),
        r_gamma_upper=math.sqrt((sched.n - 1) * w_big ** 2
                                + max(top, -h_lo) ** 2),
    )
    return boxes, summary


def build_stacked(sched: Schedule, count: int) -> Tuple[List[BoxSpec], GeometrySummary]:
    """Single vertical column: t_1 = 0, t_{j+1} = t_j - (ell_{j+1} + d_j) e_n.

    The column accumulates at depth -sum(ell_{j+1} + d_j), which converges
    only when sum 1/k_j does; of the built-in families only explicit tables
    certify that, so log-growth wavenumbers are rejected (their 1/k_j decay
    like j^(-1/n) up to logs, a divergent p-series for every n >= 2).
    """
    if count < 1:
        raise GeometryError(f"count must be >= 1, got {count}")
    if not isinstance(sched.k_family, KTable):
        raise GeometryError(
            "stacked layout needs summable 1/k_j; no tail bound is "
            "registrable for the log-growth family (divergent p-series), "
            "use an explicit wavenumber table"
        )
    n = sched.n
    boxes: List[BoxSpec] = []
    depth = 0.0
    for j in range(1, count + 1):
        p = derived_params(sched, j)
        if j > 1:
            depth = depth - p.ell - padding(sched, j - 1)
        t = (0.0,) * (n - 1) + (depth,)
        boxes.append(BoxSpec(j=j, layer=j, side=p.ell, translation=t,
                             gap=p.eps, wavenumber=p.k, target=p.a))

    # continue the recursion exactly while the tables allow, for the limit
    j = count
    while True:
        try:
            ell_next = sidelength(sched, j + 1)
            d_j = padding(sched, j)
        except ScheduleError:
            break
        depth = depth - ell_next - d_j
        j += 1
    vol_lo = math.fsum(b.side ** n for b in boxes)
    vol_tail = math.fsum(sidelength(sched, jj) ** n
                         for jj in range(count + 1, j + 1))
    sides = [b.side for b in boxes] + [sidelength(sched, jj)
                                       for jj in range(count + 1, j + 1)]
    w_big = max(sides)
    top = boxes[0].side
    summary = GeometrySummary(
        dimension=n,
        layout="stacked",
        box_count=count,
        horizontal_extent=w_big,
        height_interval=(depth, depth),
        volume_interval=(vol_lo, vol_lo + vol_tail),
        r_gamma_upper=math.sqrt((n - 1) * w_big ** 2 + max(top, -depth) ** 2),
    )
    return boxes, summary


# -------------------------------------------------------------------
# certificates
# -------------------------------------------------------------------

@dataclass(frozen=True)
class InLayerGap:
    """Minimum distance between distinct boxes of one level, with the value
    the construction promises (d_i / ln(i+e))."""

    layer: int
    min_distance: float
    expected: float

    @property
    def relative_error(self) -> float:
        return abs(self.min_distance - self.expected) / self.expected


@dataclass(frozen=True)
class CrossLayerGap:
    """Minimum distance between the boxes of two levels.

    `required` is the floor d_{i'-1} for levels i < i'.  For adjacent levels
    `constructive_gap` is the padding the height recursion inserted, which
    the measured distance must reproduce; it is None otherwise.
    """

    layer_a: int
    layer_b: int
    min_distance: float
    required: float
    constructive_gap: Optional[float]


@dataclass(frozen=True)
class DisjointnessReport:
    box_count: int
    overlap_pairs: Tuple[Tuple[int, int], ...]
    in_layer: Tuple[InLayerGap, ...]
    cross: Tuple[CrossLayerGap, ...]

    @property
    def disjoint(self) -> bool:
        return not self.overlap_pairs

    @property
    def passed(self) -> bool:
        if self.overlap_pairs:
            return False
        if any(g.relative_error > 1e-12 for g in self.in_layer):
            return False
        return all(g.min_distance >= g.required * (1.0 - 1e-12)
                   for g in self.cross)


def _bounds_arrays(boxes: Sequence[BoxSpec]) -> Tuple[np.ndarray, np.ndarray]:
    lo = np.array([b.translation for b in boxes], dtype=float)
    hi = lo + np.array([b.side for b in boxes], dtype=float)[:, None]
    return lo, hi


def _group_min_distance(lo_a, hi_a, lo_b, hi_b) -> float:
    """Minimum Euclidean distance between two families of boxes, from the
    per-axis separations (zero where the projections overlap)."""
    sep = np.maximum(lo_a[:, None, :] - hi_b[None, :, :],
                     lo_b[None, :, :] - hi_a[:, None, :])
    np.maximum(sep, 0.0, out=sep)
    return float(np.sqrt((sep ** 2).sum(axis=2)).min())


def disjointness_certificate(boxes: Sequence[BoxSpec],
                             sched: Schedule) -> DisjointnessReport:
    """Exact pairwise closure-disjointness plus the quantitative gap floors.

    Disjointness is decided by strict comparison of computed coordinates,
    no tolerance: two closed boxes are disjoint iff some axis strictly
    separates them.  Per-level and per-level-pair minimum distances are then
    measured and compared against the schedule's promised separations.
    """
    lo, hi = _bounds_arrays(boxes)
    n_boxes = len(boxes)

    overlaps: List[Tuple[int, int]] = []
    chunk = 512
    for s in range(0, n_boxes, chunk):
        e = min(s + chunk, n_boxes)
        # strict separation along some axis, either direction
        apart = ((hi[s:e, None, :] < lo[None, :, :])
                 | (hi[None, :, :] < lo[s:e, None, :])).any(axis=2)
        bad = np.argwhere(~apart)
        for a, b in bad:
            ja, jb = boxes[s + a].j, boxes[b].j
            if ja < jb:
                overlaps.append((ja, jb))

    layers = sorted({b.layer for b in boxes})
    idx: Dict[int, List[int]] = {la: [] for la in layers}
    for pos, b in enumerate(boxes):
        idx[b.layer].append(pos)

    in_layer: List[InLayerGap] = []
    for la in layers:
        pos = idx[la]
        if len(pos) < 2:
            continue
        g_lo, g_hi = lo[pos], hi[pos]
        sep = np.maximum(g_lo[:, None, :] - g_hi[None, :, :],
                         g_lo[None, :, :] - g_hi[:, None, :])
        np.maximum(sep, 0.0, out=sep)
        dist = np.sqrt((sep ** 2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        measured = float(dist.min())
        expected = padding(sched, la) / math.log(la + math.e)
        in_layer.append(InLayerGap(layer=la, min_distance=measured,
                                   expected=expected))

    cross: List[CrossLayerGap] = []
    for a_idx, la in enumerate(layers):
        for lb in layers[a_idx + 1:]:
            measured = _group_min_distance(lo[idx[la]], hi[idx[la]],
                                           lo[idx[lb]], hi[idx[lb]])
            constructive = padding(sched, la) if lb == la + 1 else None
            cross.append(CrossLayerGap(
                layer_a=la, layer_b=lb, min_distance=measured,
                required=padding(sched, lb - 1),
                constructive_gap=constructive,
            ))

    return DisjointnessReport(
        box_count=n_boxes,
        overlap_pairs=tuple(overlaps),
        in_layer=tuple(in_layer),
        cross=tuple(cross),
    )


@dataclass(frozen=True)
class FactCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ConnectivityReport:
    facts: Tuple[FactCheck, ...]

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.facts)


def connectivity_certificate(boxes: Sequence[BoxSpec],
                             summary: GeometrySummary) -> ConnectivityReport:
    """The structural facts behind connectedness of the complement:
    every box keeps a positive aperture, levels are strictly ordered in
    height with positive gaps, the horizontal extent is finite, and above
    any level bottom (minus its gap) only a finite index prefix of boxes
    lives.  Each fact is checked on the emitted data, not re-derived."""
    facts: List[FactCheck] = []

    bad_eps = [b.j for b in boxes if not b.gap > 0.0]
    facts.append(FactCheck(
        name="positive_gap_fractions",
        passed=not bad_eps,
        detail=("all boxes" if not bad_eps
                else f"zero/negative aperture at j in {bad_eps[:5]}"),
    ))

    layers = sorted({b.layer for b in boxes})
    height: Dict[int, float] = {}
    top: Dict[int, float] = {}
    for b in boxes:
        height[b.layer] = b.translation[-1]
        top[b.layer] = max(top.get(b.layer, -math.inf),
                           b.translation[-1] + b.side)
    gaps = [height[la] - top[lb] for la, lb in zip(layers, layers[1:])]
    ordered = all(g > 0.0 for g in gaps)
    facts.append(FactCheck(
        name="strict_height_ordering",
        passed=ordered,
        detail=(f"min inter-level gap {min(gaps):.6g}" if gaps else "single level"),
    ))

    facts.append(FactCheck(
        name="finite_horizontal_extent",
        passed=math.isfinite(summary.horizontal_extent),
        detail=f"extent {summary.horizontal_extent:.6g}",
    ))

    prefix_ok = True
    for la, g in zip(layers, gaps):
        cut = height[la] - g  # bottom of level la minus the measured gap
        above = {b.layer for b in boxes if b.translation[-1] > cut}
        if above != set(l for l in layers if l <= la):
            prefix_ok = False
            break
    facts.append(FactCheck(
        name="finite_prefix_above_levels",
        passed=prefix_ok,
        detail="boxes above any level cut form the index prefix" if prefix_ok
        else f"non-prefix set above level {la}",
    ))

    return ConnectivityReport(facts=tuple(facts))


# -------------------------------------------------------------------
# flood-fill oracle (independent connectivity probe, dimension 2)
# -------------------------------------------------------------------

def _feature_scale(boxes: Sequence[BoxSpec]) -> float:
    """Smallest geometric feature: positive aperture widths and pairwise
    box distances.  Sealed boxes (gap 0) contribute no aperture feature."""
    feats = [b.side * b.gap for b in boxes if b.gap > 0.0]
    if len(boxes) > 1:
        lo, hi = _bounds_arrays(boxes)
        sep = np.maximum(lo[:, None, :] - hi[None, :, :],
                         lo[None, :, :] - hi[:, None, :])
        np.maximum(sep, 0.0, out=sep)
        dist = np.sqrt((sep ** 2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        feats.append(float(dist.min()))
    if not feats:
        raise GeometryError("no positive feature to resolve")
    return min(feats)


def suggested_resolution(boxes: Sequence[BoxSpec]) -> float:
    """A raster pitch safely below the oracle's precondition (scale/5)."""
    return _feature_scale(boxes) / 5.0


def flood_fill_oracle(boxes: Sequence[BoxSpec], resolution: float) -> bool:
    """Raster test (dimension 2 only): is the complement of the drawn
    boundary curves connected?

    Each box contributes its closed square outline minus the aperture
    segment [t_1, t_1 + side*gap] on the bottom edge.  Cells whose closed
    square meets a drawn segment are blocked (conservative), the outside is
    flooded 4-connectedly from the padded border, and the answer is whether
    every unblocked cell was reached.  Conservative blocking cannot
    spuriously disconnect anything because every true passage is at least
    4 cells wide under the resolution precondition.
    """
    if not boxes:
        raise GeometryError("no boxes to rasterize")
    if len(boxes[0].translation) != 2:
        raise GeometryError("flood-fill oracle is defined for dimension 2 only")
    if resolution <= 0.0:
        raise ResolutionTooCoarseError("resolution must be positive")
    scale = _feature_scale(boxes)
    if not resolution < scale / 4.0:
        raise ResolutionTooCoarseError(
            f"resolution {resolution} cannot resolve the smallest feature "
            f"{scale} (need < {scale / 4.0})"
        )

    lo, hi = _bounds_arrays(boxes)
    pad = max(b.side for b in boxes) + 2.0 * resolution
    # half-cell shift keeps structure coordinates off cell boundaries
    x0 = float(lo[:, 0].min()) - pad - 0.5 * resolution
    y0 = float(lo[:, 1].min()) - pad - 0.5 * resolution
    nx = int(math.ceil((float(hi[:, 0].max()) + pad - x0) / resolution)) + 1
    ny = int(math.ceil((float(hi[:, 1].max()) + pad - y0) / resolution)) + 1
    blocked = np.zeros((ny, nx), dtype=bool)

    def cells(a: float, b: float, origin: float, limit: int) -> Tuple[int, int]:
        c0 = int(math.floor((a - origin) / resolution))
        c1 = int(math.floor((b - origin) / resolution))
        return max(c0, 0), min(c1, limit - 1)

    def block_h(xa: float, xb: float, y: float) -> None:
        ca, cb = cells(xa, xb, x0, nx)
        r = int(math.floor((y - y0) / resolution))
        if 0 <= r < ny and ca <= cb:
            blocked[r, ca:cb + 1] = True

    def block_v(x: float, ya: float, yb: float) -> None:
        ra, rb = cells(ya, yb, y0, ny)
        c = int(math.floor((x - x0) / resolution))
        if 0 <= c < nx and ra <= rb:
            blocked[ra:rb + 1, c] = True

    for b in boxes:
        t1, t2 = b.translation
        s = b.side
        block_h(t1, t1 + s, t2 + s)          # top edge
        block_v(t1, t2, t2 + s)              # left edge
        block_v(t1 + s, t2, t2 + s)          # right edge
        block_h(t1 + b.gap * s, t1 + s, t2)  # bottom edge minus aperture

    visited = np.zeros_like(blocked)
    queue: deque = deque()
    for r in range(ny):
        for c in (0, nx - 1):
            if not blocked[r, c] and not visited[r, c]:
                visited[r, c] = True
                queue.append((r, c))
    for c in range(nx):
        for r in (0, ny - 1):
            if not blocked[r, c] and not visited[r, c]:
                visited[r, c] = True
                queue.append((r, c))
    while queue:
        r, c = queue.popleft()
        if r > 0 and not blocked[r - 1, c] and not visited[r - 1, c]:
            visited[r - 1, c] = True
            queue.append((r - 1, c))
        if r + 1 < ny and not blocked[r + 1, c] and not visited[r + 1, c]:
            visited[r + 1, c] = True
            queue.append((r + 1, c))
        if c > 0 and not blocked[r, c - 1] and not visited[r, c - 1]:
            visited[r, c - 1] = True
            queue.append((r, c - 1))
        if c + 1 < nx and not blocked[r, c + 1] and not visited[r, c + 1]:
            visited[r, c + 1] = True
            queue.append((r, c + 1))

    return bool(visited.sum() == (~blocked).sum())
