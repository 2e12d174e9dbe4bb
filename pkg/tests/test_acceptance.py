"""Acceptance gate: twelve binding checks, one test per criterion.

Each test prints a single verdict line and then asserts it, so a full run
reads as a checklist: build counts, quadrature oracles for the quasimode
norms, both routes to the inf-sup bound, the certification chain with its
spot value, the special-function residual grid, the modal sign sweep with
its exact boundary cases, the trace inequality, packing invariants, and
byte determinism of the emitted artifacts.
"""

import dataclasses
import math
import random
import time

import numpy as np
from numpy.polynomial.legendre import leggauss

from trapcert.certify import (
    TraceTest,
    certify_geometry,
    infsup_upper,
    quasimode_norms,
    resolvent_lower,
    trace_inequality_residual,
)
from trapcert.cli import run
from trapcert.dtnverify import a_nu, b_m, default_rho_grid, verify_sweep
from trapcert.geometry import (
    build_layered,
    disjointness_certificate,
    flood_fill_oracle,
    layer_plan,
    suggested_resolution,
)
from trapcert.sequences import demo_schedule, gap_fraction, padding
from trapcert.specfun import selftest_rows


def _verdict(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num:02d}: {detail}"


def _gauss(lo: float, hi: float, m: int = 48):
    x, w = leggauss(m)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return mid + half * x, half * w


# -------------------------------------------------------------------
# 1. layered build count
# -------------------------------------------------------------------

def test_criterion_01_layered_figure_count():
    t0 = time.perf_counter()
    boxes, summary = build_layered(demo_schedule(), 30)
    elapsed = time.perf_counter() - t0
    ok = len(boxes) == 1413 and summary.box_count == 1413 and elapsed < 1.0
    _verdict(1, ok, f"30-level layered build has {len(boxes)} boxes "
                    f"(want 1413) in {elapsed:.3f}s (budget 1s)")


# -------------------------------------------------------------------
# 2. layer-2 count across dimensions
# -------------------------------------------------------------------

def test_criterion_02_layer_two_count():
    counts = {n: layer_plan(demo_schedule(n), 2).count for n in (2, 3, 4)}
    ok = all(counts[n] == 3 ** (n - 1) for n in (2, 3, 4))
    _verdict(2, ok, f"level-2 box counts {counts} match 3^(n-1) exactly")


# -------------------------------------------------------------------
# 3. quasimode norms vs tensor quadrature
# -------------------------------------------------------------------

def _tensor_quadrature_norms(n: int, k: float, eps: float, m: int = 32):
    """Unfactorized tensor-product Gauss quadrature of the energy density
    over the cube and of the normal-derivative square over the aperture."""
    ell = math.pi * math.sqrt(n) / k
    c = k / math.sqrt(n)

    x, w = _gauss(0.0, ell, m)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    u = np.ones_like(grids[0])
    for g in grids:
        u = u * np.sin(c * g)
    grad_sq = np.zeros_like(u)
    for i in range(n):
        term = np.full_like(u, c)
        for axis, g in enumerate(grids):
            term = term * (np.cos(c * g) if axis == i else np.sin(c * g))
        grad_sq = grad_sq + term * term
    weight = np.ones_like(u)
    for i in range(n):
        shape = [1] * n
        shape[i] = m
        weight = weight * w.reshape(shape)
    h1k = float(((grad_sq + k * k * u * u) * weight).sum())

    xg, wg = _gauss(0.0, eps * ell, m)
    ggrids = np.meshgrid(*([xg] * (n - 1)), indexing="ij")
    dn = np.full_like(ggrids[0], c)
    for g in ggrids:
        dn = dn * np.sin(c * g)
    gweight = np.ones_like(ggrids[0])
    for i in range(n - 1):
        shape = [1] * (n - 1)
        shape[i] = m
        gweight = gweight * wg.reshape(shape)
    flux = float((dn * dn * gweight).sum())
    return h1k, flux


def test_criterion_03_norm_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    pi_sq_ok = True
    for n in (2, 3):
        for k in (1.0, 5.0, 20.0):
            ell = math.pi * math.sqrt(n) / k
            for eps in (0.05, 0.3, 0.517):
                norms = quasimode_norms(n, k, ell, eps)
                ref_h1k, ref_flux = _tensor_quadrature_norms(n, k, eps)
                worst = max(worst,
                            abs(norms.h1k_norm_sq - ref_h1k) / ref_h1k,
                            abs(norms.flux_norm_sq - ref_flux) / ref_flux)
                if n == 2 and abs(norms.h1k_norm_sq - math.pi ** 2) > 1e-12 * math.pi ** 2:
                    pi_sq_ok = False
    elapsed = time.perf_counter() - t0
    ok = worst <= 1.0e-8 and pi_sq_ok and elapsed < 10.0
    _verdict(3, ok, f"closed-form norms vs quadrature worst rel err "
                    f"{worst:.3e} (tol 1e-8), n=2 energy = pi^2: {pi_sq_ok}, "
                    f"{elapsed:.2f}s (budget 10s)")


# -------------------------------------------------------------------
# 4. inverse identity for the inf-sup bound
# -------------------------------------------------------------------

def test_criterion_04_infsup_inverse_identity():
    rng = random.Random(20260823)
    worst = 0.0
    for _ in range(100):
        n = rng.randint(2, 5)
        k = 10.0 ** rng.uniform(-1.0, 2.0)
        a = 10.0 ** rng.uniform(-5.0, 1.0)
        eps = gap_fraction(n, k, a)
        lhs = 1.0 / infsup_upper(n, eps)
        rhs = (math.sqrt(math.pi) * n ** 0.75
               * (1.0 + 2.0 * k * math.sqrt(2.0 * k * k * a * a + a)))
        worst = max(worst, abs(lhs - rhs) / rhs)
    ok = worst <= 1.0e-9
    _verdict(4, ok, f"1/infsup_upper vs sqrt(pi) n^(3/4) X on 100 random "
                    f"cases, worst rel err {worst:.3e} (tol 1e-9)")


# -------------------------------------------------------------------
# 5. certification chain on the figure configuration
# -------------------------------------------------------------------

def test_criterion_05_certification_margins():
    t0 = time.perf_counter()
    boxes, _ = build_layered(demo_schedule(), 10)
    records = certify_geometry(boxes[:100])
    elapsed = time.perf_counter() - t0
    min_margin = min(r.margin for r in records)
    spot = records[0]
    spot_ok = abs(spot.c_lb - 0.09401) < 5.0e-5 and spot.a == 1.0e-4
    ok = (len(records) == 100 and min_margin > 0.0 and spot_ok
          and elapsed < 5.0)
    _verdict(5, ok, f"first 100 boxes: min margin {min_margin:.3e} > 0, "
                    f"cLB(j=1) = {spot.c_lb:.5f} (spot 0.09401 +- 5e-5) vs "
                    f"a_1 = {spot.a:g}, {elapsed:.2f}s (budget 5s)")


# -------------------------------------------------------------------
# 6. resolvent-floor round trip
# -------------------------------------------------------------------

def test_criterion_06_resolvent_round_trip():
    rng = random.Random(915)
    worst = 0.0
    for _ in range(1000):
        k = 10.0 ** rng.uniform(0.0, 3.0)
        a = 10.0 ** rng.uniform(-6.0, 2.0)
        threshold = 1.0 + 2.0 * k * math.sqrt(2.0 * k * k * a * a + a)
        _, c_lb = resolvent_lower(threshold, k)
        worst = max(worst, abs(c_lb - a) / a)
    ok = worst <= 1.0e-12
    _verdict(6, ok, f"resolvent_lower inverts the threshold on 1000 random "
                    f"cases, worst rel err {worst:.3e} (tol 1e-12)")


# -------------------------------------------------------------------
# 7. special-function residual grid
# -------------------------------------------------------------------

def test_criterion_07_special_function_grid():
    t0 = time.perf_counter()
    rows = 0
    failures = 0
    worst_wronskian = 0.0
    worst_halfint = 0.0
    for _, _, wr, herr, row_ok in selftest_rows():
        rows += 1
        worst_wronskian = max(worst_wronskian, wr)
        if herr is not None:
            worst_halfint = max(worst_halfint, herr)
        if not row_ok:
            failures += 1
    elapsed = time.perf_counter() - t0
    ok = (failures == 0 and worst_wronskian <= 1.0e-10
          and worst_halfint <= 1.0e-10 and elapsed < 30.0)
    _verdict(7, ok, f"{rows} grid points: worst wronskian residual "
                    f"{worst_wronskian:.3e}, worst closed-form error "
                    f"{worst_halfint:.3e} (tol 1e-10), {failures} failures, "
                    f"{elapsed:.1f}s (budget 30s)")


# -------------------------------------------------------------------
# 8. modal sign sweep
# -------------------------------------------------------------------

def test_criterion_08_dtn_sweep_clean():
    t0 = time.perf_counter()
    summary = verify_sweep()
    elapsed = time.perf_counter() - t0
    ok = (summary.passed and summary.a_violations == 0
          and summary.b_violations == 0 and summary.re_violations == 0
          and summary.im_violations == 0 and elapsed < 300.0)
    _verdict(8, ok, f"sweep n={summary.n_values}, m<={summary.m_max}, "
                    f"{summary.rho_count} radii: "
                    f"{summary.a_violations}/{summary.b_violations}/"
                    f"{summary.re_violations}/{summary.im_violations} "
                    f"violations over {summary.checked_modes} checks, "
                    f"{elapsed:.1f}s (budget 300s)")


# -------------------------------------------------------------------
# 9. exact boundary cases of the sign kernels
# -------------------------------------------------------------------

def test_criterion_09_exact_boundary_cases():
    grid = default_rho_grid()
    worst_a = max(abs(a_nu(0.5, float(t))) / max(1.0, 4.0 * t / math.pi)
                  for t in grid)
    worst_b = max(abs(b_m(0, 3, float(r), 1.0)) / max(1.0, 4.0 / (math.pi * r))
                  for r in grid)
    point = b_m(0, 3, 1.0, 2.0)
    point_err = abs(point + 2.0 / math.pi)
    ok = worst_a <= 1.0e-10 and worst_b <= 1.0e-10 and point_err <= 1.0e-10
    _verdict(9, ok, f"A_(1/2) scaled residual {worst_a:.3e}, B_0(n=3,alpha=1) "
                    f"scaled residual {worst_b:.3e} (tol 1e-10), "
                    f"B_0(n=3,alpha=2,rho=1) = {point:.12f} vs -2/pi "
                    f"(err {point_err:.3e})")


# -------------------------------------------------------------------
# 10. trace inequality
# -------------------------------------------------------------------

def _quadrature_trace_norms(n: int, a: float, test: TraceTest, m: int = 48):
    """Face, volume, and gradient norms of the separable test function by
    one-dimensional Gauss quadrature of each factor."""
    x, w = _gauss(0.0, a, m)
    sin_sq = [float(w @ np.sin(math.pi * p * x / a) ** 2) for p in test.p]
    cos_sq = [float(w @ np.cos(math.pi * p * x / a) ** 2) for p in test.p]
    tail_sq = float(w @ (1.0 - x / a) ** (2 * test.q))
    dtail_sq = float(w @ ((test.q / a) * (1.0 - x / a) ** (test.q - 1)) ** 2)
    lhs = float(np.prod(sin_sq))
    vol = lhs * tail_sq
    grad = lhs * dtail_sq
    for i, p in enumerate(test.p):
        term = (math.pi * p / a) ** 2 * cos_sq[i] * tail_sq
        for jj, _ in enumerate(test.p):
            if jj != i:
                term *= sin_sq[jj]
        grad += term
    return lhs, vol, grad


def test_criterion_10_trace_inequality():
    lhs, rhs = trace_inequality_residual(2, 1.0, TraceTest((1,), 1))
    worked_ok = lhs == 0.5 and round(rhs, 4) == 1.1958

    rng = random.Random(4711)
    all_hold = True
    second_form_ok = True
    quad_agree = 0.0
    for _ in range(50):
        n = rng.choice((2, 3))
        p = tuple(rng.randint(1, 5) for _ in range(n - 1))
        q = rng.randint(1, 4)
        a = 10.0 ** rng.uniform(-1.0, 1.0)
        lhs_i, rhs_i = trace_inequality_residual(n, a, TraceTest(p, q))
        if lhs_i > rhs_i * (1.0 + 1.0e-12):
            all_hold = False
        q_lhs, q_vol, q_grad = _quadrature_trace_norms(n, a, TraceTest(p, q))
        q_rhs = 2.0 * math.sqrt(q_vol) * math.sqrt(q_grad)
        scale = max(1.0, rhs_i)
        quad_agree = max(quad_agree, abs(lhs_i - q_lhs) / scale,
                         abs(rhs_i - q_rhs) / scale)
        for k in (1.0, 10.0):
            h1k_over_k = (q_grad + k * k * q_vol) / k
            if lhs_i > h1k_over_k * (1.0 + 1.0e-10):
                second_form_ok = False
    ok = (worked_ok and all_hold and second_form_ok and quad_agree <= 1.0e-8)
    _verdict(10, ok, f"worked case ({lhs}, {rhs:.5f}) vs (0.5, 1.19580); "
                     f"50 random cases hold: {all_hold}, quadrature "
                     f"agreement {quad_agree:.3e}, second form "
                     f"(k in {{1,10}}): {second_form_ok}")


# -------------------------------------------------------------------
# 11. packing invariants and the connectivity oracle
# -------------------------------------------------------------------

def test_criterion_11_packing_invariants():
    sched = demo_schedule()
    boxes, _ = build_layered(sched, 3)
    report = disjointness_certificate(boxes, sched)
    disjoint_ok = report.disjoint and not report.overlap_pairs
    in_layer_ok = all(g.relative_error <= 1.0e-12 for g in report.in_layer)
    adjacent = [g for g in report.cross if g.layer_b == g.layer_a + 1]
    cross_ok = bool(adjacent) and all(
        g.constructive_gap == padding(sched, g.layer_a) for g in adjacent)

    res = suggested_resolution(boxes)
    open_connected = flood_fill_oracle(boxes, res)
    sealed = [dataclasses.replace(b, gap=0.0) for b in boxes]
    sealed_disconnected = not flood_fill_oracle(sealed, res)

    ok = (disjoint_ok and in_layer_ok and cross_ok and open_connected
          and sealed_disconnected)
    _verdict(11, ok, f"disjoint: {disjoint_ok}, in-layer gaps match "
                     f"d_i/ln(i+e) to 1e-12: {in_layer_ok}, adjacent-layer "
                     f"gaps are exactly d_i: {cross_ok}, flood fill "
                     f"open/sealed: {open_connected}/{not sealed_disconnected}")


# -------------------------------------------------------------------
# 12. artifact determinism
# -------------------------------------------------------------------

def test_criterion_12_artifact_determinism(tmp_path):
    config = tmp_path / "fig.json"
    config.write_text(
        '{\n'
        ' "dimension": 2,\n'
        ' "schedule": {\n'
        '  "wavenumbers": {"family": "log-growth", "c": 2.0},\n'
        '  "targets": {"family": "power", "amplitude": 1.0e-4, "exponent": 0.25},\n'
        '  "paddings": {"family": "shifted-power", "amplitude": 2.0,'
        ' "shift": 6.0, "exponent": 1.2}\n'
        ' },\n'
        ' "layout": "layered",\n'
        ' "layers": 6\n'
        '}\n', encoding="utf-8")
    codes = []
    for name in ("one", "two"):
        out = tmp_path / name
        codes.append(run(["build", "--config", str(config), "--out", str(out)]))
        codes.append(run(["plot", "--config", str(config), "--out", str(out)]))
    json_same = ((tmp_path / "one" / "geometry.json").read_bytes()
                 == (tmp_path / "two" / "geometry.json").read_bytes())
    svg_same = ((tmp_path / "one" / "figure.svg").read_bytes()
                == (tmp_path / "two" / "figure.svg").read_bytes())
    ok = codes == [0, 0, 0, 0] and json_same and svg_same
    _verdict(12, ok, f"two runs, exit codes {codes}: geometry JSON "
                     f"byte-identical: {json_same}, SVG byte-identical: "
                     f"{svg_same}")
