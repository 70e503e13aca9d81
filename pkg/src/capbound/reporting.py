"""Serialization of reports to JSON, CSV and static SVG plots.

All JSON and CSV artifacts are byte-reproducible: keys are sorted, floats
are rendered with shortest round-trip repr, and nothing time- or
locale-dependent enters the files.  Emitting a parsed JSON report again
yields the identical bytes.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .bounds import BoundReport
from .errors import NumericalError
from .symmetric import RadialScan

SCHEMA = "capbound/1"

_SVG_STYLE = {
    "svg.hashsalt": "capbound",   # content-derived ids, stable across runs
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
}


def to_jsonable(obj):
    """Recursively convert dataclasses / numpy types to plain JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: to_jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def canonical_json(payload: dict) -> str:
    """Canonical JSON text: sorted keys, 2-space indent, no NaN/inf."""
    try:
        return json.dumps(to_jsonable(payload), indent=2, sort_keys=True,
                          allow_nan=False) + "\n"
    except ValueError as exc:
        raise NumericalError(f"non-finite value in a successful report: {exc}") from exc


def write_json(path: Path, payload: dict) -> Path:
    path.write_text(canonical_json(payload))
    return path


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header: list[str], rows: Iterable[Iterable]) -> Path:
    lines = [",".join(header)]
    lines += [",".join(_cell(x) for x in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams.update(_SVG_STYLE)
    return plt


def _save_svg(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


# ---------------------------------------------------------------------------
# Payload builders
# ---------------------------------------------------------------------------


def envelope(kind: str, config: dict, payload: dict, version: str) -> dict:
    return {
        "schema": SCHEMA,
        "kind": kind,
        "tool": {"name": "capbound", "version": version,
                 "units": "geometric (G = c = 1); lengths in mesh units"},
        "config": to_jsonable(config),
        "report": to_jsonable(payload),
    }


def bound_report_payload(report: BoundReport) -> dict:
    return {
        "inputs": to_jsonable(report.measures),
        "bounds": {
            "lower_volume": report.lower_volume,
            "lower_hawking": report.lower_hawking,
            "szego": report.szego,
            "bray_miao": report.bray_miao,
            "profile_steiner": report.profile_bound,
        },
        "capacity_bem": report.capacity_bem,
        "bem_error_estimate": report.bem_error_estimate,
        "szego_omitted_reason": report.szego_omitted_reason,
        "flags": to_jsonable(report.flags),
    }


def radial_scan_payload(scan: RadialScan) -> dict:
    return {
        "t": scan.t,
        "r": scan.r,
        "area": scan.area,
        "mean_curvature": scan.mean_curvature,
        "hawking_mass": scan.hawking_mass,
        "scalar_curvature": scan.scalar_curvature,
        "flags": {
            "scalar_nonnegative": scan.scalar_nonnegative,
            "hawking_monotone": scan.hawking_monotone,
        },
    }


BOUNDS_CSV_HEADER = ["mesh", "area", "willmore", "capacity_bem",
                     "bray_miao", "gap_ratio"]


def bound_report_csv_row(name: str, report: BoundReport) -> list:
    gap = report.flags.get("bray_miao_gap")
    return [name, report.measures.area, report.measures.willmore,
            report.capacity_bem, report.bray_miao, gap]


RADIAL_CSV_HEADER = ["r", "area", "H", "m_H", "R"]


def radial_scan_csv_rows(scan: RadialScan) -> list[list]:
    return [
        [scan.r[i], scan.area[i], scan.mean_curvature[i],
         scan.hawking_mass[i], scan.scalar_curvature[i]]
        for i in range(len(scan.r))
    ]


PROFILE_CSV_HEADER = ["t", "T", "f"]


# ---------------------------------------------------------------------------
# SVG plots
# ---------------------------------------------------------------------------


def plot_bound_comparison(reports: list[tuple[str, BoundReport]], path: Path) -> Path:
    """Bar-style comparison of bounds vs solved capacity per mesh."""
    plt = _pyplot()
    fig, ax = plt.subplots()
    names = [n for n, _ in reports]
    x = np.arange(len(reports))
    series = [
        ("lower_volume", [r.lower_volume for _, r in reports], "v"),
        ("capacity_bem", [r.capacity_bem for _, r in reports], "o"),
        ("szego", [r.szego for _, r in reports], "s"),
        ("bray_miao", [r.bray_miao for _, r in reports], "^"),
    ]
    for label, vals, marker in series:
        xs = [xi for xi, v in zip(x, vals) if v is not None]
        ys = [v for v in vals if v is not None]
        if ys:
            ax.plot(xs, ys, marker=marker, linestyle="-", label=label)
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("length")
    ax.legend(fontsize=8)
    ax.set_title("capacity bounds")
    fig.tight_layout()
    out = _save_svg(fig, path)
    plt.close(fig)
    return out


def plot_hawking_trace(scan: RadialScan, path: Path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots()
    ax.plot(scan.t, scan.hawking_mass, label="m_H(t)")
    ax.plot(scan.t, scan.scalar_curvature, label="R(r(t))", linestyle="--")
    ax.set_xlabel("flow time t")
    ax.legend(fontsize=8)
    ax.set_title("Hawking mass along the coordinate-sphere flow")
    fig.tight_layout()
    out = _save_svg(fig, path)
    plt.close(fig)
    return out


def plot_profile(t: np.ndarray, big_t: np.ndarray, f: np.ndarray, path: Path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots()
    ax.plot(t, big_t, label="T(t)")
    ax.set_yscale("log")
    ax.set_xlabel("flow time t")
    ax.set_ylabel("T(t)")
    ax2 = ax.twinx()
    ax2.plot(t, f, color="tab:orange", label="f(t)")
    ax2.set_ylabel("f(t)")
    ax2.set_ylim(0.0, 1.05)
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], fontsize=8)
    ax.set_title("level-set profile and optimal test function")
    fig.tight_layout()
    out = _save_svg(fig, path)
    plt.close(fig)
    return out


# ---------------------------------------------------------------------------
# emit_report
# ---------------------------------------------------------------------------


def emit_report(report: BoundReport | RadialScan, formats: set[str],
                out_dir: str | Path, stem: str, config: dict | None = None,
                version: str = "0") -> list[Path]:
    """Write a report in the requested formats; returns the created files.

    An empty format set writes nothing.  BoundReport emits a one-row CSV in
    the corpus schema; RadialScan emits the (r, area, H, m_H, R) scan.
    """
    unknown = formats - {"json", "csv", "svg"}
    if unknown:
        raise ValueError(f"unknown emit formats: {sorted(unknown)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = config or {}
    files: list[Path] = []
    if isinstance(report, BoundReport):
        if "json" in formats:
            payload = envelope("bound_report", config,
                               bound_report_payload(report), version)
            files.append(write_json(out_dir / f"{stem}_bounds.json", payload))
        if "csv" in formats:
            files.append(write_csv(out_dir / f"{stem}_bounds.csv",
                                   BOUNDS_CSV_HEADER,
                                   [bound_report_csv_row(stem, report)]))
        if "svg" in formats:
            files.append(plot_bound_comparison([(stem, report)],
                                               out_dir / f"{stem}_bounds.svg"))
    elif isinstance(report, RadialScan):
        if "json" in formats:
            payload = envelope("radial_scan", config,
                               radial_scan_payload(report), version)
            files.append(write_json(out_dir / f"{stem}_radial.json", payload))
        if "csv" in formats:
            files.append(write_csv(out_dir / f"{stem}_radial.csv",
                                   RADIAL_CSV_HEADER,
                                   radial_scan_csv_rows(report)))
        if "svg" in formats:
            files.append(plot_hawking_trace(report,
                                            out_dir / f"{stem}_radial.svg"))
    else:
        raise TypeError(f"cannot emit report of type {type(report).__name__}")
    return files
