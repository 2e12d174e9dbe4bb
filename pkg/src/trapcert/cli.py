"""Config parsing, subcommand dispatch, and deterministic artifact emitters.

Everything a run produces (geometry JSON, certification CSV, figure SVG,
text report) is a pure function of the configuration document, so re-running
with the same config reproduces every artifact byte for byte.  Files are
written to a temporary sibling and renamed into place, which leaves no
partial artifact behind on failure.

Exit codes follow one contract for every subcommand: 0 on success, 1 when a
certificate or sign check fails (the run itself worked, the claim did not
hold), 2 on configuration, domain, usage, or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from trapcert.certify import CertifyError, CertRecord, certify_geometry
from trapcert.dtnverify import (
    DEFAULT_M_MAX,
    DEFAULT_N_VALUES,
    SweepSummary,
    verify_sweep,
)
from trapcert.geometry import (
    BoxSpec,
    ConnectivityReport,
    DisjointnessReport,
    GeometryError,
    GeometrySummary,
    build_layered,
    build_stacked,
    connectivity_certificate,
    disjointness_certificate,
    iter_layer_plans,
)
from trapcert.sequences import (
    APower,
    ATable,
    DShiftedPower,
    DTable,
    GrowthFloorReport,
    KLogGrowth,
    KTable,
    Schedule,
    ScheduleError,
    derived_params,
    growth_floor_check,
    padding,
)
from trapcert.specfun import BesselDomainError, BesselRangeError, selftest_rows


class ConfigError(ValueError):
    """The configuration document or command line is invalid."""


# -------------------------------------------------------------------
# configuration document
# -------------------------------------------------------------------

@dataclass(frozen=True)
class OutputPaths:
    """Requested artifact paths; an emitter runs only if its path is set."""

    json: Optional[str] = None
    csv: Optional[str] = None
    svg: Optional[str] = None
    report: Optional[str] = None


@dataclass(frozen=True)
class SweepParams:
    """Grid for the modal sign-check sweep."""

    n_values: Tuple[int, ...] = DEFAULT_N_VALUES
    m_max: int = DEFAULT_M_MAX
    rho_points: int = 2000
    rho_min: float = 0.05
    rho_max: float = 200.0

    def rho_grid(self) -> np.ndarray:
        return np.geomspace(self.rho_min, self.rho_max, self.rho_points)


@dataclass(frozen=True)
class RunConfig:
    """Parsed run configuration.

    `dimension`, the schedule families, `layout`, and `truncation` are only
    required by the subcommands that build geometry; a sweep-only config can
    omit them.  `sweep` is None when the config has no "sweep" key, which
    tells the report subcommand to skip that stage.
    """

    dimension: Optional[int] = None
    k_family: Optional[object] = None
    a_family: Optional[object] = None
    d_family: Optional[object] = None
    layout: Optional[str] = None
    truncation: Optional[int] = None
    outputs: OutputPaths = OutputPaths()
    precision_digits: int = 15
    sweep: Optional[SweepParams] = None

    def schedule(self) -> Schedule:
        if self.dimension is None:
            raise ConfigError("config needs 'dimension' for geometry commands")
        if self.k_family is None:
            raise ConfigError("config needs 'schedule' for geometry commands")
        return Schedule(
            n=self.dimension,
            k_family=self.k_family,
            a_family=self.a_family,
            d_family=self.d_family,
            precision_digits=self.precision_digits,
        )

    def geometry(self) -> Tuple[List[BoxSpec], GeometrySummary]:
        if self.layout is None or self.truncation is None:
            raise ConfigError(
                "config needs 'layout' and a truncation ('layers' or "
                "'boxCount') for geometry commands"
            )
        sched = self.schedule()
        if self.layout == "layered":
            return build_layered(sched, self.truncation)
        return build_stacked(sched, self.truncation)


def _as_mapping(value, where: str) -> Mapping:
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a JSON object, got {type(value).__name__}")
    return value


def _reject_unknown(doc: Mapping, allowed: Sequence[str], where: str) -> None:
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigError(
            f"unknown key(s) in {where}: {', '.join(unknown)} "
            f"(allowed: {', '.join(sorted(allowed))})"
        )


def _as_int(value, where: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where} must be >= {minimum}, got {value}")
    return value


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _as_str(value, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{where} must be a nonempty string, got {value!r}")
    return value


def _as_number_list(value, where: str) -> List[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where} must be a nonempty array")
    return [_as_float(v, f"{where}[{i}]") for i, v in enumerate(value)]


def _parse_k_family(doc: Mapping):
    doc = _as_mapping(doc, "schedule.wavenumbers")
    fam = _as_str(doc.get("family"), "schedule.wavenumbers.family")
    if fam == "log-growth":
        _reject_unknown(doc, ("family", "c"), "schedule.wavenumbers")
        return KLogGrowth(_as_float(doc.get("c"), "schedule.wavenumbers.c"))
    if fam == "table":
        _reject_unknown(doc, ("family", "values"), "schedule.wavenumbers")
        return KTable(tuple(_as_number_list(doc.get("values"),
                                            "schedule.wavenumbers.values")))
    raise ConfigError(
        f"schedule.wavenumbers.family must be 'log-growth' or 'table', got {fam!r}"
    )


def _parse_a_family(doc: Mapping):
    doc = _as_mapping(doc, "schedule.targets")
    fam = _as_str(doc.get("family"), "schedule.targets.family")
    if fam == "power":
        _reject_unknown(doc, ("family", "amplitude", "exponent"), "schedule.targets")
        return APower(_as_float(doc.get("amplitude"), "schedule.targets.amplitude"),
                      _as_float(doc.get("exponent"), "schedule.targets.exponent"))
    if fam == "table":
        _reject_unknown(doc, ("family", "values"), "schedule.targets")
        return ATable(tuple(_as_number_list(doc.get("values"),
                                            "schedule.targets.values")))
    raise ConfigError(
        f"schedule.targets.family must be 'power' or 'table', got {fam!r}"
    )


def _parse_d_family(doc: Mapping):
    doc = _as_mapping(doc, "schedule.paddings")
    fam = _as_str(doc.get("family"), "schedule.paddings.family")
    if fam == "shifted-power":
        _reject_unknown(doc, ("family", "amplitude", "shift", "exponent"),
                        "schedule.paddings")
        return DShiftedPower(
            _as_float(doc.get("amplitude"), "schedule.paddings.amplitude"),
            _as_float(doc.get("shift"), "schedule.paddings.shift"),
            _as_float(doc.get("exponent"), "schedule.paddings.exponent"),
        )
    if fam == "table":
        _reject_unknown(doc, ("family", "values"), "schedule.paddings")
        return DTable(tuple(_as_number_list(doc.get("values"),
                                            "schedule.paddings.values")))
    raise ConfigError(
        f"schedule.paddings.family must be 'shifted-power' or 'table', got {fam!r}"
    )


def _parse_outputs(doc: Mapping) -> OutputPaths:
    doc = _as_mapping(doc, "outputs")
    _reject_unknown(doc, ("json", "csv", "svg", "report"), "outputs")
    return OutputPaths(**{key: _as_str(doc[key], f"outputs.{key}")
                          for key in doc})


def _parse_sweep(doc: Mapping) -> SweepParams:
    doc = _as_mapping(doc, "sweep")
    _reject_unknown(doc, ("nValues", "mMax", "rhoPoints", "rhoMin", "rhoMax"),
                    "sweep")
    params = SweepParams()
    if "nValues" in doc:
        raw = doc["nValues"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("sweep.nValues must be a nonempty array")
        params = replace(params, n_values=tuple(
            _as_int(v, f"sweep.nValues[{i}]", minimum=2)
            for i, v in enumerate(raw)))
    if "mMax" in doc:
        params = replace(params, m_max=_as_int(doc["mMax"], "sweep.mMax", minimum=0))
    if "rhoPoints" in doc:
        params = replace(params,
                         rho_points=_as_int(doc["rhoPoints"], "sweep.rhoPoints",
                                            minimum=2))
    if "rhoMin" in doc:
        params = replace(params, rho_min=_as_float(doc["rhoMin"], "sweep.rhoMin"))
    if "rhoMax" in doc:
        params = replace(params, rho_max=_as_float(doc["rhoMax"], "sweep.rhoMax"))
    if not (0.0 < params.rho_min < params.rho_max):
        raise ConfigError("sweep needs 0 < rhoMin < rhoMax")
    return params


_TOP_KEYS = ("dimension", "schedule", "layout", "layers", "boxCount",
             "outputs", "precisionDigits", "sweep")


def config_from_mapping(doc: Mapping) -> RunConfig:
    """Build a RunConfig from a parsed JSON document, rejecting unknown keys
    at every level."""
    doc = _as_mapping(doc, "config")
    _reject_unknown(doc, _TOP_KEYS, "config")

    dimension = None
    if "dimension" in doc:
        dimension = _as_int(doc["dimension"], "dimension", minimum=2)

    k_family = a_family = d_family = None
    if "schedule" in doc:
        sdoc = _as_mapping(doc["schedule"], "schedule")
        _reject_unknown(sdoc, ("wavenumbers", "targets", "paddings"), "schedule")
        for key in ("wavenumbers", "targets", "paddings"):
            if key not in sdoc:
                raise ConfigError(f"schedule needs '{key}'")
        k_family = _parse_k_family(sdoc["wavenumbers"])
        a_family = _parse_a_family(sdoc["targets"])
        d_family = _parse_d_family(sdoc["paddings"])

    layout = None
    if "layout" in doc:
        layout = _as_str(doc["layout"], "layout")
        if layout not in ("layered", "stacked"):
            raise ConfigError(f"layout must be 'layered' or 'stacked', got {layout!r}")

    if "layers" in doc and "boxCount" in doc:
        raise ConfigError("give either 'layers' or 'boxCount', not both")
    truncation = None
    if "layers" in doc:
        truncation = _as_int(doc["layers"], "layers", minimum=1)
    elif "boxCount" in doc:
        truncation = _as_int(doc["boxCount"], "boxCount", minimum=1)

    outputs = _parse_outputs(doc["outputs"]) if "outputs" in doc else OutputPaths()
    precision = 15
    if "precisionDigits" in doc:
        precision = _as_int(doc["precisionDigits"], "precisionDigits", minimum=15)
    sweep = _parse_sweep(doc["sweep"]) if "sweep" in doc else None

    return RunConfig(dimension=dimension, k_family=k_family, a_family=a_family,
                     d_family=d_family, layout=layout, truncation=truncation,
                     outputs=outputs, precision_digits=precision, sweep=sweep)


def load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_mapping(doc)


# -------------------------------------------------------------------
# deterministic emitters
# -------------------------------------------------------------------

def _write_text_atomic(path: str, text: str) -> None:
    """Write via a temporary sibling and rename, so failures leave either
    the old file or nothing."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def geometry_document(boxes: Sequence[BoxSpec], summary: GeometrySummary) -> dict:
    """The JSON-ready document for a built arrangement.  All floats pass
    through json.dumps unchanged, i.e. as shortest round-trip decimals."""
    return {
        "dimension": summary.dimension,
        "layout": summary.layout,
        "summary": {
            "boxCount": summary.box_count,
            "horizontalExtent": summary.horizontal_extent,
            "heightInterval": list(summary.height_interval),
            "volumeInterval": list(summary.volume_interval),
            "rGammaUpper": summary.r_gamma_upper,
        },
        "boxes": [
            {
                "j": b.j,
                "layer": b.layer,
                "side": b.side,
                "translation": list(b.translation),
                "gap": b.gap,
                "wavenumber": b.wavenumber,
                "targetA": b.target,
            }
            for b in boxes
        ],
    }


def emit_geometry_json(boxes: Sequence[BoxSpec], summary: GeometrySummary,
                       path: str) -> None:
    text = json.dumps(geometry_document(boxes, summary), indent=1) + "\n"
    _write_text_atomic(path, text)


def _f6(value: float) -> str:
    out = f"{value:.6f}"
    return "0.000000" if out == "-0.000000" else out


def svg_document(boxes: Sequence[BoxSpec]) -> str:
    """Vector figure of a planar arrangement: per box, the closed outline
    minus the slot on the bottom edge (anchored at the box corner), grey
    interior fill, 5% view margin.  Planar only."""
    if not boxes:
        raise GeometryError("nothing to draw: no boxes")
    if any(len(b.translation) != 2 for b in boxes):
        raise GeometryError(
            f"SVG output is only defined for dimension 2, "
            f"got dimension {len(boxes[0].translation)}"
        )
    xs_lo = min(b.translation[0] for b in boxes)
    xs_hi = max(b.translation[0] + b.side for b in boxes)
    ys_lo = min(b.translation[1] for b in boxes)
    ys_hi = max(b.translation[1] + b.side for b in boxes)
    margin = 0.05 * max(xs_hi - xs_lo, ys_hi - ys_lo)
    # world y points up; SVG y points down
    view = (xs_lo - margin, -ys_hi - margin,
            (xs_hi - xs_lo) + 2.0 * margin, (ys_hi - ys_lo) + 2.0 * margin)
    stroke = max(1.0e-6, 0.02 * min(b.side for b in boxes))

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{_f6(view[0])} {_f6(view[1])} {_f6(view[2])} {_f6(view[3])}">',
        f'<g fill="#e6e6e6" stroke="#000000" stroke-width="{_f6(stroke)}" '
        f'stroke-linecap="butt" stroke-linejoin="miter">',
    ]
    for b in boxes:
        x0, y0 = b.translation
        x1, y1 = x0 + b.side, y0 + b.side
        slot = x0 + b.side * b.gap
        # start at the slot's inner end, trace bottom-right-top-left back to
        # the corner; the fill closes the subpath, the stroke leaves it open
        lines.append(
            f'<path d="M {_f6(slot)} {_f6(-y0)} L {_f6(x1)} {_f6(-y0)} '
            f'L {_f6(x1)} {_f6(-y1)} L {_f6(x0)} {_f6(-y1)} '
            f'L {_f6(x0)} {_f6(-y0)}"/>'
        )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_svg(boxes: Sequence[BoxSpec], path: str) -> None:
    _write_text_atomic(path, svg_document(boxes))


_CSV_COLUMNS = ("j", "k", "a", "eps", "infsup_ub", "cprime_lb", "c_lb", "margin")


def certificates_csv(records: Sequence[CertRecord]) -> str:
    """CSV text of a certification run: one row per box, 17 significant
    digits (round-trip exact), LF line endings."""
    lines = [",".join(_CSV_COLUMNS)]
    for r in records:
        lines.append(f"{r.j},{r.k:.17g},{r.a:.17g},{r.eps:.17g},"
                     f"{r.infsup_ub:.17g},{r.c_prime_lb:.17g},"
                     f"{r.c_lb:.17g},{r.margin:.17g}")
    return "\n".join(lines) + "\n"


def emit_certificates_csv(records: Sequence[CertRecord], path: str) -> None:
    _write_text_atomic(path, certificates_csv(records))


# -------------------------------------------------------------------
# report
# -------------------------------------------------------------------

@dataclass(frozen=True)
class StageOutputs:
    """Everything the stages of one run produced, for the composed report."""

    schedule_note: Optional[str] = None
    growth: Optional[GrowthFloorReport] = None
    summary: Optional[GeometrySummary] = None
    disjointness: Optional[DisjointnessReport] = None
    connectivity: Optional[ConnectivityReport] = None
    certificates: Optional[Tuple[CertRecord, ...]] = None
    certify_error: Optional[str] = None
    sweep: Optional[SweepSummary] = None

    @property
    def empty(self) -> bool:
        return self.summary is None and self.sweep is None

    @property
    def passed(self) -> bool:
        checks = [self.certify_error is None]
        for stage in (self.growth, self.disjointness, self.connectivity,
                      self.sweep):
            if stage is not None:
                checks.append(stage.passed)
        return all(checks) and not self.empty


def _family_label(fam) -> str:
    if isinstance(fam, KLogGrowth):
        return f"log-growth(c={fam.c:g})"
    if isinstance(fam, APower):
        return f"power({fam.amplitude:g} * j^{fam.exponent:g})"
    if isinstance(fam, DShiftedPower):
        return f"shifted-power({fam.amplitude:g} * (i+{fam.shift:g})^-{fam.exponent:g})"
    return f"table[{len(fam.values)} values]"


def schedule_label(sched: Schedule) -> str:
    return (f"n={sched.n}; wavenumbers {_family_label(sched.k_family)}; "
            f"targets {_family_label(sched.a_family)}; "
            f"paddings {_family_label(sched.d_family)}")


def render_report(stages: StageOutputs) -> str:
    """Human-readable composition of everything the run checked."""
    lines = ["certificate report", "=" * len("certificate report"), ""]
    if stages.empty:
        lines.append("no stages executed")
        return "\n".join(lines) + "\n"

    if stages.schedule_note is not None:
        lines.append(f"schedule: {stages.schedule_note}")
    if stages.growth is not None:
        g = stages.growth
        verdict = "pass" if g.passed else f"FAIL at j={g.first_failure}"
        lines.append(f"growth floor (c={g.c:g}, j <= {g.j_max}): {verdict}")

    if stages.summary is not None:
        s = stages.summary
        lines.append(f"geometry: {s.layout}, {s.box_count} boxes, dimension {s.dimension}")
        lines.append(f"  horizontal extent {s.horizontal_extent:.6g}")
        lines.append(f"  accumulation height in [{s.height_interval[0]:.6g}, "
                     f"{s.height_interval[1]:.6g}]")
        lines.append(f"  total volume in [{s.volume_interval[0]:.6g}, "
                     f"{s.volume_interval[1]:.6g}]")
        lines.append(f"  circumradius <= {s.r_gamma_upper:.6g}")
    if stages.disjointness is not None:
        d = stages.disjointness
        verdict = "pass" if d.passed else f"FAIL ({len(d.overlap_pairs)} overlaps)"
        lines.append(f"  disjointness: {verdict}")
    if stages.connectivity is not None:
        c = stages.connectivity
        if c.passed:
            lines.append(f"  connectivity: pass ({len(c.facts)}/{len(c.facts)} facts)")
        else:
            for fact in c.facts:
                if not fact.passed:
                    lines.append(f"  connectivity: FAIL ({fact.name}: {fact.detail})")
    if stages.certificates is not None:
        worst = min(stages.certificates, key=lambda r: r.margin)
        lines.append(f"certification: {len(stages.certificates)} boxes, "
                     f"min margin {worst.margin:.6g} at j={worst.j}: pass")
    if stages.certify_error is not None:
        lines.append(f"certification: FAIL ({stages.certify_error})")

    if stages.sweep is not None:
        w = stages.sweep
        verdict = "pass" if w.passed else "FAIL"
        lines.append(
            f"dtn sweep: n in {{{', '.join(str(n) for n in w.n_values)}}}, "
            f"m <= {w.m_max}, {w.rho_count} radii: "
            f"{w.a_violations} interior, {w.b_violations_hypothesis} boundary, "
            f"{w.re_violations} sign, {w.im_violations} wronskian violations "
            f"({w.checked_modes} checks): {verdict}"
        )

    lines.append("")
    lines.append(f"overall: {'pass' if stages.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def report(stages: StageOutputs, path: str) -> None:
    _write_text_atomic(path, render_report(stages))


# -------------------------------------------------------------------
# subcommands
# -------------------------------------------------------------------

def _effective_outputs(cfg: RunConfig, out_dir: Optional[str]) -> OutputPaths:
    """Config paths, redirected into --out when given (keeping basenames,
    filling defaults for paths the config left unset)."""
    if out_dir is None:
        return cfg.outputs
    os.makedirs(out_dir, exist_ok=True)

    def pick(configured: Optional[str], default: str) -> str:
        name = Path(configured).name if configured else default
        return str(Path(out_dir) / name)

    return OutputPaths(json=pick(cfg.outputs.json, "geometry.json"),
                       csv=pick(cfg.outputs.csv, "certificates.csv"),
                       svg=pick(cfg.outputs.svg, "figure.svg"),
                       report=pick(cfg.outputs.report, "report.txt"))


def _require_path(outputs: OutputPaths, kind: str, command: str) -> str:
    path = getattr(outputs, kind)
    if not path:
        raise ConfigError(
            f"'{command}' needs an output path: set outputs.{kind} in the "
            f"config or pass --out DIR"
        )
    return path


def _cmd_plan(cfg: RunConfig, outputs: OutputPaths, out) -> int:
    sched = cfg.schedule()
    if cfg.layout is None or cfg.truncation is None:
        raise ConfigError("config needs 'layout' and a truncation for 'plan'")
    print(f"schedule: {schedule_label(sched)}", file=out)
    if cfg.layout == "layered":
        print(f"{'level':>5} {'boxes':>6} {'first-j':>8} {'height':>12} "
              f"{'side':>10} {'pitch':>10} {'width':>10}", file=out)
        total = 0
        for plan in iter_layer_plans(sched, cfg.truncation):
            total += plan.count
            print(f"{plan.i:>5} {plan.count:>6} {plan.start_index:>8} "
                  f"{plan.height:>12.6f} {plan.max_side:>10.6f} "
                  f"{plan.pitch:>10.6f} {plan.width:>10.6f}", file=out)
        print(f"total boxes through level {cfg.truncation}: {total}", file=out)
    else:
        print(f"{'j':>5} {'k':>12} {'side':>10} {'base height':>12}", file=out)
        depth = 0.0
        for j in range(1, cfg.truncation + 1):
            p = derived_params(sched, j)
            if j > 1:
                depth -= p.ell + padding(sched, j - 1)
            print(f"{j:>5} {p.k:>12.6f} {p.ell:>10.6f} {depth:>12.6f}", file=out)
        print(f"total boxes: {cfg.truncation}", file=out)
    return 0


def _geometry_with_certificates(cfg: RunConfig):
    boxes, summary = cfg.geometry()
    sched = cfg.schedule()
    disj = disjointness_certificate(boxes, sched)
    conn = connectivity_certificate(boxes, summary)
    return boxes, summary, disj, conn


def _cmd_build(cfg: RunConfig, outputs: OutputPaths, out) -> int:
    path = _require_path(outputs, "json", "build")
    boxes, summary, disj, conn = _geometry_with_certificates(cfg)
    if not disj.passed:
        print(f"disjointness certificate failed: "
              f"{len(disj.overlap_pairs)} overlapping pairs", file=sys.stderr)
        return 1
    if not conn.passed:
        failed = [f.name for f in conn.facts if not f.passed]
        print(f"connectivity certificate failed: {', '.join(failed)}",
              file=sys.stderr)
        return 1
    emit_geometry_json(boxes, summary, path)
    print(f"wrote {path} ({summary.box_count} boxes, "
          f"disjointness and connectivity certified)", file=out)
    return 0


def _cmd_certify(cfg: RunConfig, outputs: OutputPaths, out) -> int:
    path = _require_path(outputs, "csv", "certify")
    boxes, _ = cfg.geometry()
    records = certify_geometry(boxes)
    emit_certificates_csv(records, path)
    worst = min(records, key=lambda r: r.margin)
    print(f"wrote {path} ({len(records)} certificates, "
          f"min margin {worst.margin:.6g} at j={worst.j})", file=out)
    return 0


def _cmd_plot(cfg: RunConfig, outputs: OutputPaths, out) -> int:
    path = _require_path(outputs, "svg", "plot")
    if cfg.dimension != 2:
        raise ConfigError(
            f"'plot' draws planar figures only, config has dimension {cfg.dimension}"
        )
    boxes, summary = cfg.geometry()
    emit_svg(boxes, path)
    print(f"wrote {path} ({summary.box_count} box outlines)", file=out)
    return 0


def _cmd_verify_dtn(cfg: RunConfig, outputs: OutputPaths, out) -> int:
    params = cfg.sweep if cfg.sweep is not None else SweepParams()
    summary = verify_sweep(n_values=params.n_values, m_max=params.m_max,
                           rho_grid=params.rho_grid())
    verdict = "pass" if summary.passed else "FAIL"
    print(f"dtn sweep: n in {{{', '.join(str(n) for n in summary.n_values)}}}, "
          f"m <= {summary.m_max}, {summary.rho_count} radii, "
          f"{summary.checked_modes} checks: "
          f"{summary.a_violations} interior, "
          f"{summary.b_violations_hypothesis} boundary, "
          f"{summary.re_violations} sign, "
          f"{summary.im_violations} wronskian violations: {verdict}", file=out)
    if not summary.passed:
        for rec in summary.violations[:20]:
            print(f"  n={rec.n} m={rec.m} rho={rec.rho:.6g} "
                  f"alpha={rec.alpha:g}: A={rec.a_nu:.6g} B={rec.b_m:.6g}",
                  file=sys.stderr)
        return 1
    return 0


def _cmd_selftest(cfg: RunConfig, outputs: OutputPaths, out) -> int:
    rows = failures = 0
    worst_wronskian = 0.0
    worst_halfint = 0.0
    for _, _, wr, herr, ok in selftest_rows():
        rows += 1
        worst_wronskian = max(worst_wronskian, wr)
        if herr is not None:
            worst_halfint = max(worst_halfint, herr)
        if not ok:
            failures += 1
    verdict = "pass" if failures == 0 else "FAIL"
    print(f"special-function selftest: {rows} grid points, {failures} failures, "
          f"worst wronskian residual {worst_wronskian:.3g}, "
          f"worst half-integer error {worst_halfint:.3g}: {verdict}", file=out)
    return 0 if failures == 0 else 1


def _cmd_report(cfg: RunConfig, outputs: OutputPaths, out) -> int:
    kwargs = {}
    wants_geometry = (cfg.layout is not None or cfg.truncation is not None
                      or cfg.k_family is not None)
    if wants_geometry:
        sched = cfg.schedule()
        boxes, summary, disj, conn = _geometry_with_certificates(cfg)
        kwargs.update(schedule_note=schedule_label(sched), summary=summary,
                      disjointness=disj, connectivity=conn)
        if isinstance(sched.k_family, KLogGrowth):
            j_max = min(summary.box_count, 1000)
            kwargs["growth"] = growth_floor_check(sched, sched.k_family.c, j_max)
        try:
            kwargs["certificates"] = certify_geometry(boxes)
        except CertifyError as exc:
            kwargs["certify_error"] = str(exc)
    if cfg.sweep is not None:
        kwargs["sweep"] = verify_sweep(n_values=cfg.sweep.n_values,
                                       m_max=cfg.sweep.m_max,
                                       rho_grid=cfg.sweep.rho_grid())
    stages = StageOutputs(**kwargs)
    text = render_report(stages)
    if outputs.report:
        _write_text_atomic(outputs.report, text)
        print(f"wrote {outputs.report}", file=out)
    else:
        out.write(text)
    if stages.empty:
        return 0
    return 0 if stages.passed else 1


_HANDLERS = {
    "plan": _cmd_plan,
    "build": _cmd_build,
    "certify": _cmd_certify,
    "verify-dtn": _cmd_verify_dtn,
    "specfun-selftest": _cmd_selftest,
    "plot": _cmd_plot,
    "report": _cmd_report,
}

_NEEDS_CONFIG = ("plan", "build", "certify", "plot", "report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trapcert",
        description="Build slotted-box scatterer families and check their "
                    "resolvent-growth certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("plan", "print the per-level layout table without building boxes"),
        ("build", "build the arrangement, certify packing, write geometry JSON"),
        ("certify", "run the resolvent-bound chain per box, write CSV"),
        ("verify-dtn", "sweep the modal sign checks on spheres"),
        ("specfun-selftest", "residual checks for the special-function engine"),
        ("plot", "write the planar figure as SVG"),
        ("report", "run all configured stages and write a combined report"),
    )
    for name, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH",
                       required=name in _NEEDS_CONFIG,
                       help="JSON run configuration"
                            + ("" if name in _NEEDS_CONFIG else " (optional)"))
        p.add_argument("--layers", type=int, metavar="N",
                       help="override the configured truncation")
        p.add_argument("--dimension", type=int, metavar="N",
                       help="override the configured dimension")
        p.add_argument("--out", metavar="DIR",
                       help="redirect all artifacts into DIR")
        p.add_argument("--precision", type=int, metavar="D",
                       help="override precisionDigits")
    return parser


def run(argv: Sequence[str]) -> int:
    """Parse argv, dispatch, and map every failure onto the exit contract."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    try:
        if args.command == "specfun-selftest":
            cfg = RunConfig()  # the engine selftest takes no configuration
        elif args.config:
            cfg = load_config(args.config)
        else:
            cfg = RunConfig()
        if args.layers is not None:
            if args.layers < 1:
                raise ConfigError(f"--layers must be >= 1, got {args.layers}")
            cfg = replace(cfg, truncation=args.layers)
        if args.dimension is not None:
            if args.dimension < 2:
                raise ConfigError(f"--dimension must be >= 2, got {args.dimension}")
            cfg = replace(cfg, dimension=args.dimension)
        if args.precision is not None:
            if args.precision < 15:
                raise ConfigError(f"--precision must be >= 15, got {args.precision}")
            cfg = replace(cfg, precision_digits=args.precision)
        outputs = _effective_outputs(cfg, args.out)
        return _HANDLERS[args.command](cfg, outputs, sys.stdout)
    except CertifyError as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ScheduleError, GeometryError, BesselDomainError,
            BesselRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
