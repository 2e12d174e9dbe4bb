"""Tests for the layered/stacked builders and geometric certificates.

Frozen reference values were computed with mpmath at 40 significant digits
(see oracles.py for the regeneration convention); the builder walks the same
recursions in binary64, so agreement is asserted at 1e-13 relative.
"""

import dataclasses
import math

import pytest
from hypothesis import given, strategies as st

from trapcert.geometry import (
    BoxSpec,
    GeometryError,
    ResolutionTooCoarseError,
    _grid_digits,
    _width_tail_bound,
    build_layered,
    build_stacked,
    connectivity_certificate,
    disjointness_certificate,
    flood_fill_oracle,
    layer_plan,
    suggested_resolution,
)
from trapcert.sequences import (
    APower,
    DShiftedPower,
    DTable,
    KLogGrowth,
    KTable,
    Schedule,
    ScheduleError,
    demo_schedule,
    padding,
    partial_volume,
    sidelength,
)

S2 = demo_schedule()

# level data of the demo schedule (n=2), mpmath 40 digits
HEIGHTS = {1: 0.0, 2: -1.3493320595455889, 3: -2.0888692891672507,
           4: -2.55335106710476}
MAX_SIDES = {1: 1.8514306121285546, 2: 1.1557289414311658,
             3: 0.57459874077504996}
PITCHES = {1: 1.998852196078278, 2: 1.2620417783408255,
           3: 0.65672368585395032}
WIDTHS = {2: 3.7861253350224765, 3: 3.2836184292697516}
GAP_IN_LAYER_3 = 0.082124945078900359

COUNTS_30 = [1, 3, 5, 7, 10, 12, 15, 18, 22, 25, 28, 32, 35, 39, 43, 46,
             50, 54, 58, 62, 66, 70, 74, 78, 83, 87, 91, 95, 100, 104]


def rel(x, y):
    return abs(x - y) / abs(y)


# -------------------------------------------------------------------
# layer plans
# -------------------------------------------------------------------

def test_layer_plan_frozen_values():
    starts = {1: 1, 2: 2, 3: 5, 4: 10}
    cols = {1: 1, 2: 3, 3: 5, 4: 7}
    for i in (1, 2, 3, 4):
        p = layer_plan(S2, i)
        assert p.start_index == starts[i]
        assert p.cols == cols[i]
        assert p.count == cols[i]
        if i == 1:
            assert p.height == 0.0
        else:
            assert rel(p.height, HEIGHTS[i]) < 1e-13
        if i in MAX_SIDES:
            assert rel(p.max_side, MAX_SIDES[i]) < 1e-13
            assert rel(p.pitch, PITCHES[i]) < 1e-13
        if i in WIDTHS:
            assert rel(p.width, WIDTHS[i]) < 1e-13


def test_layer_plan_pitch_exceeds_side():
    for i in range(1, 20):
        p = layer_plan(S2, i)
        assert p.pitch > p.max_side


def test_layer_plan_bad_index():
    with pytest.raises(GeometryError):
        layer_plan(S2, 0)


def test_width_peak_at_level_two():
    # widths are not monotone (the floor in the column count causes small
    # upticks) but level 2 is the global maximum
    widths = [layer_plan(S2, i).width for i in range(1, 31)]
    assert widths.index(max(widths)) == 1
    assert all(w < widths[1] for w in widths[2:])


def test_width_tail_bound_below_built_maximum():
    # analytically, levels beyond the extension horizon stay narrower than
    # the widest computed level, so the reported extent is global
    assert _width_tail_bound(S2, 257) < WIDTHS[2]


@given(st.integers(1, 9), st.integers(1, 3), st.data())
def test_grid_digits_roundtrip(cols, axes, data):
    r = data.draw(st.integers(0, cols ** axes - 1))
    digits = _grid_digits(r, cols, axes)
    assert len(digits) == axes
    assert all(0 <= d < cols for d in digits)
    assert sum(d * cols ** (axes - 1 - a) for a, d in enumerate(digits)) == r


# -------------------------------------------------------------------
# layered builder
# -------------------------------------------------------------------

def test_demo_thirty_layers_counts():
    boxes, summary = build_layered(S2, 30)
    assert summary.box_count == len(boxes) == 1413
    per_layer = {}
    for b in boxes:
        per_layer[b.layer] = per_layer.get(b.layer, 0) + 1
    assert [per_layer[i] for i in range(1, 31)] == COUNTS_30
    assert [b.j for b in boxes] == list(range(1, 1414))


def test_layer_two_count_across_dimensions():
    for n in (2, 3, 4):
        sched = demo_schedule(n)
        boxes, _ = build_layered(sched, 2)
        assert sum(1 for b in boxes if b.layer == 2) == 3 ** (n - 1)


def test_first_box_at_origin_with_demo_side():
    boxes, _ = build_layered(S2, 1)
    assert len(boxes) == 1
    b = boxes[0]
    assert b.translation == (0.0, 0.0)
    assert rel(b.side, MAX_SIDES[1]) < 1e-13
    assert b.gap > 0.5  # the first aperture fraction is just above 1/2


def test_box_fields_match_schedule():
    boxes, _ = build_layered(S2, 3)
    for b in boxes:
        assert b.side == sidelength(S2, b.j)
        lo, hi = b.bounds()
        assert all(h - l == pytest.approx(b.side, rel=1e-15) for l, h in zip(lo, hi))
    assert boxes[2].j == 3 and boxes[2].layer == 2


def test_second_level_translations_row_major():
    boxes, _ = build_layered(S2, 2)
    level2 = [b for b in boxes if b.layer == 2]
    p = layer_plan(S2, 2)
    for r, b in enumerate(level2):
        assert b.translation == (p.pitch * r, p.height)
    assert rel(level2[1].translation[0], PITCHES[2]) < 1e-13
    assert rel(level2[0].translation[1], HEIGHTS[2]) < 1e-13


def test_three_d_translations_row_major():
    sched = demo_schedule(3)
    boxes, _ = build_layered(sched, 2)
    level2 = [b for b in boxes if b.layer == 2]
    assert len(level2) == 9
    p = layer_plan(sched, 2)
    digits = [(r // 3, r % 3) for r in range(9)]
    for (d0, d1), b in zip(digits, level2):
        assert b.translation == (p.pitch * d0, p.pitch * d1, p.height)


def test_heights_strictly_decreasing_with_constructive_gaps():
    boxes, _ = build_layered(S2, 6)
    height = {}
    top = {}
    for b in boxes:
        height[b.layer] = b.translation[-1]
        top[b.layer] = max(top.get(b.layer, -math.inf), b.translation[-1] + b.side)
    for i in range(1, 6):
        gap = height[i] - top[i + 1]
        assert gap > 0.0
        assert rel(gap, padding(S2, i)) < 1e-12


def test_summary_demo_values():
    boxes, summary = build_layered(S2, 30)
    assert summary.dimension == 2
    assert summary.layout == "layered"
    assert rel(summary.horizontal_extent, WIDTHS[2]) < 1e-13
    lo, hi = summary.height_interval
    assert lo < hi < 0.0
    # the enclosure sits strictly below every built box
    assert hi < min(b.translation[-1] for b in boxes)
    vlo, vhi = summary.volume_interval
    assert vlo == pytest.approx(partial_volume(S2, 1413), rel=1e-15)
    assert vlo < vhi


def test_enclosures_nest_as_truncation_deepens():
    _, s_a = build_layered(S2, 256)
    _, s_b = build_layered(S2, 300)
    assert s_a.height_interval[0] <= s_b.height_interval[0]
    assert s_b.height_interval[1] <= s_a.height_interval[1]
    assert s_a.volume_interval[0] <= s_b.volume_interval[0]
    assert s_b.volume_interval[1] <= s_a.volume_interval[1]


def test_r_gamma_upper_covers_every_built_box():
    boxes, summary = build_layered(S2, 30)
    worst = 0.0
    for b in boxes:
        lo, hi = b.bounds()
        corner = math.sqrt(sum(max(abs(l), abs(h)) ** 2 for l, h in zip(lo, hi)))
        worst = max(worst, corner)
    assert worst <= summary.r_gamma_upper


def test_horizontal_extent_covers_built_boxes():
    boxes, summary = build_layered(S2, 30)
    reach = max(max(b.bounds()[1][:-1]) for b in boxes)
    assert reach <= summary.horizontal_extent


def test_layered_with_exact_fit_tables():
    kvals = [2.0 + 0.5 * j for j in range(4)]
    sched = Schedule(2, KTable(kvals), APower(1e-4, 0.25), DTable([0.3, 0.2]))
    boxes, summary = build_layered(sched, 2)
    assert summary.box_count == 4
    assert summary.height_interval[0] == summary.height_interval[1]
    assert summary.volume_interval[0] == summary.volume_interval[1]
    with pytest.raises(ScheduleError):
        build_layered(sched, 3)


def test_layered_rejects_zero_layers():
    with pytest.raises(GeometryError):
        build_layered(S2, 0)


# -------------------------------------------------------------------
# stacked builder
# -------------------------------------------------------------------

def stacked_schedule(extra=False):
    base = math.pi * math.sqrt(2.0)
    kvals = [base, 2 * base] + ([4 * base] if extra else [])
    dvals = [1.0] + ([0.5] if extra else [])
    return Schedule(2, KTable(kvals), APower(1e-4, 0.25), DTable(dvals))


def test_stacked_example_exact():
    boxes, summary = build_stacked(stacked_schedule(), 2)
    assert [b.side for b in boxes] == [1.0, 0.5]
    assert boxes[0].translation == (0.0, 0.0)
    assert boxes[1].translation == (0.0, -1.5)
    assert [b.layer for b in boxes] == [1, 2]
    assert summary.layout == "stacked"
    assert summary.height_interval == (-1.5, -1.5)
    assert summary.volume_interval == (1.25, 1.25)
    assert summary.horizontal_extent == 1.0
    assert summary.r_gamma_upper == pytest.approx(math.sqrt(3.25), rel=1e-15)


def test_stacked_limit_uses_full_tables():
    boxes, summary = build_stacked(stacked_schedule(extra=True), 2)
    assert len(boxes) == 2
    # placeable box 3 (side 1/4, after padding 1/2) extends the enclosure
    assert summary.height_interval == (-2.25, -2.25)
    assert summary.volume_interval == (1.25, 1.25 + 0.0625)


def test_stacked_rejects_parametric_wavenumbers():
    with pytest.raises(GeometryError, match="summable"):
        build_stacked(S2, 3)


def test_stacked_count_past_table():
    with pytest.raises(ScheduleError):
        build_stacked(stacked_schedule(), 5)


def test_stacked_disjointness_generic():
    sched = stacked_schedule(extra=True)
    boxes, _ = build_stacked(sched, 3)
    report = disjointness_certificate(boxes, sched)
    assert report.passed and report.disjoint
    assert report.in_layer == ()  # singleton levels
    adjacent = [g for g in report.cross if g.constructive_gap is not None]
    assert [g.constructive_gap for g in adjacent] == [1.0, 0.5]


# -------------------------------------------------------------------
# disjointness certificate
# -------------------------------------------------------------------

def test_disjointness_demo_three_layers():
    boxes, _ = build_layered(S2, 3)
    report = disjointness_certificate(boxes, S2)
    assert report.passed
    assert report.overlap_pairs == ()
    gaps = {g.layer: g for g in report.in_layer}
    assert set(gaps) == {2, 3}
    assert rel(gaps[3].expected, GAP_IN_LAYER_3) < 1e-13
    assert gaps[3].relative_error <= 1e-12
    for g in report.cross:
        if g.constructive_gap is not None:
            assert g.constructive_gap == padding(S2, g.layer_a)
            assert rel(g.min_distance, g.constructive_gap) <= 1e-12
        assert g.required == padding(S2, g.layer_b - 1)
        assert g.min_distance >= g.required * (1 - 1e-12)


def test_disjointness_demo_thirty_layers():
    boxes, _ = build_layered(S2, 30)
    report = disjointness_certificate(boxes, S2)
    assert report.passed
    assert report.box_count == 1413
    assert len(report.cross) == 30 * 29 // 2
    assert max(g.relative_error for g in report.in_layer) <= 1e-12


def test_disjointness_flags_overlap():
    boxes, _ = build_layered(S2, 2)
    tampered = list(boxes)
    tampered[1] = dataclasses.replace(boxes[1], translation=(0.5, 0.0))
    report = disjointness_certificate(tampered, S2)
    assert not report.disjoint
    assert (1, 2) in report.overlap_pairs
    assert not report.passed


def test_disjointness_touching_closures_flagged():
    # closure disjointness is strict: sharing a face must fail
    boxes, _ = build_layered(S2, 2)
    side = boxes[0].side
    tampered = [boxes[0], dataclasses.replace(boxes[1], translation=(side, 0.0))]
    report = disjointness_certificate(tampered, S2)
    assert not report.disjoint


# -------------------------------------------------------------------
# connectivity certificate and flood-fill oracle
# -------------------------------------------------------------------

def test_connectivity_facts_demo():
    boxes, summary = build_layered(S2, 3)
    report = connectivity_certificate(boxes, summary)
    assert report.passed
    assert [f.name for f in report.facts] == [
        "positive_gap_fractions",
        "strict_height_ordering",
        "finite_horizontal_extent",
        "finite_prefix_above_levels",
    ]


def test_connectivity_fails_on_sealed_boxes():
    boxes, summary = build_layered(S2, 3)
    sealed = [dataclasses.replace(b, gap=0.0) for b in boxes]
    report = connectivity_certificate(sealed, summary)
    assert not report.passed
    assert not report.facts[0].passed


def test_flood_fill_demo_connected():
    boxes, _ = build_layered(S2, 3)
    assert flood_fill_oracle(boxes, suggested_resolution(boxes))


def test_flood_fill_sealed_disconnected():
    boxes, _ = build_layered(S2, 3)
    sealed = [dataclasses.replace(b, gap=0.0) for b in boxes]
    # sealed boxes have no aperture feature; the pitch still sets the scale
    assert not flood_fill_oracle(sealed, suggested_resolution(sealed))


def test_flood_fill_resolution_guard():
    boxes, _ = build_layered(S2, 3)
    scale_res = suggested_resolution(boxes)
    with pytest.raises(ResolutionTooCoarseError):
        flood_fill_oracle(boxes, scale_res * 10)
    with pytest.raises(ResolutionTooCoarseError):
        flood_fill_oracle(boxes, 0.0)


def test_flood_fill_dimension_guard():
    boxes, _ = build_layered(demo_schedule(3), 1)
    with pytest.raises(GeometryError):
        flood_fill_oracle(boxes, 0.01)


def test_flood_fill_single_open_box():
    box = BoxSpec(j=1, layer=1, side=1.0, translation=(0.0, 0.0), gap=0.3,
                  wavenumber=math.pi * math.sqrt(2), target=1e-4)
    assert flood_fill_oracle([box], 0.3 * 0.9 / 4.5)
    sealed = dataclasses.replace(box, gap=0.0)
    with pytest.raises(GeometryError):
        flood_fill_oracle([sealed], 0.01)  # no positive feature at all
