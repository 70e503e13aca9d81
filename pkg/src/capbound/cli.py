"""Command-line interface.

Commands
--------
measure        integral invariants of a mesh file
capacity       BEM capacity of a mesh file
bounds         all capacity bounds for a mesh (optionally with BEM)
schwarzschild  closed forms and equality checks of the constant-mass metric
symmetric      tabulated rotationally symmetric metric from a CSV mass function
corpus         bounds for every mesh in a directory, with a summary table

Units are geometric (G = c = 1); lengths are mesh units.  Exit codes:
0 success, 1 input error, 2 numerical failure.  Errors are reported as a
machine-readable JSON object on stdout.  Artifacts are deterministic:
identical inputs and configuration produce byte-identical JSON/CSV.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bem import refine_capacity, solve_capacity
from .bounds import (
    BoundReport,
    bound_report,
    bray_miao_bound,
    imcf_profile,
    optimal_profile_bound,
)
from .errors import CapboundError, MeshError, NumericalError
from .mesh import TriMesh, load_mesh, make_primitive, measure
from .reporting import (
    BOUNDS_CSV_HEADER,
    PROFILE_CSV_HEADER,
    RADIAL_CSV_HEADER,
    bound_report_csv_row,
    bound_report_payload,
    canonical_json,
    emit_report,
    envelope,
    plot_bound_comparison,
    plot_hawking_trace,
    plot_profile,
    radial_scan_csv_rows,
    write_csv,
    write_json,
)
from .symmetric import (
    adm_mass,
    geometry_at,
    imcf_trace,
    mass_bound_check,
    radial_capacity,
    schwarzschild_closed_forms,
    schwarzschild_metric,
    static_check,
    tabulated_metric_from_csv,
)

_TRACE_STEPS = 161


@dataclass
class RunConfig:
    """Validated CLI configuration for one invocation."""

    command: str
    inputs: list[str] = field(default_factory=list)
    with_bem: bool = False
    tolerance: float = 1e-6
    out_dir: str = "."
    emit: set[str] = field(default_factory=lambda: {"json"})
    m: float | None = None
    r0: float | None = None
    mass_fn: str | None = None
    alpha: float = 0.0
    t_max: float | None = None
    threads: int = 1

    def __post_init__(self):
        if self.command not in {"measure", "capacity", "bounds",
                                "schwarzschild", "symmetric", "corpus"}:
            raise ValueError(f"unknown command {self.command!r}")
        if not 0.0 < self.tolerance <= 1e-2:
            raise ValueError("tolerance must lie in (0, 1e-2]")
        if self.emit - {"json", "csv", "svg"}:
            raise ValueError(f"unknown emit formats: {sorted(self.emit)}")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        if self.threads < 1:
            raise ValueError("thread count must be >= 1")

    def echo(self) -> dict:
        return {
            "command": self.command,
            "inputs": list(self.inputs),
            "bem": self.with_bem,
            "tolerance": self.tolerance,
            "out": self.out_dir,
            "emit": sorted(self.emit),
            "m": self.m,
            "r0": self.r0,
            "mass_fn": self.mass_fn,
            "alpha": self.alpha,
            "tmax": self.t_max,
        }


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit with the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    p = _Parser(
        prog="capbound",
        description="Capacity of closed surfaces and the bounds that cage it.",
        epilog="Units are geometric (G = c = 1); lengths are mesh units.",
    )
    p.add_argument("--version", action="version", version=f"capbound {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--tol", type=float, default=1e-6,
                        help="solver tolerance in (0, 1e-2]")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--emit", default="json",
                        help="comma list of json,csv,svg (empty for none)")

    mesh_help = ("OBJ/PLY file, or a generator spec such as sphere:1:3, "
                 "spheroid:2:1:4, box:1:1:1:0.2:3, torus:2:0.5:3 "
                 "(trailing number = subdivisions)")

    sp = sub.add_parser("measure", help="integral invariants of a mesh")
    sp.add_argument("mesh", help=mesh_help)
    common(sp)

    sp = sub.add_parser("capacity", help="BEM capacity of a mesh")
    sp.add_argument("mesh", help=mesh_help)
    sp.add_argument("--refine", nargs="*", default=None, metavar="MESH",
                    help="additional refinements for Richardson extrapolation")
    common(sp)

    sp = sub.add_parser("bounds", help="all capacity bounds for a mesh")
    sp.add_argument("mesh", help=mesh_help)
    sp.add_argument("--bem", action="store_true", help="also solve for the capacity")
    common(sp)

    sp = sub.add_parser("schwarzschild", help="constant-mass metric checks")
    sp.add_argument("--m", type=float, required=True, help="mass parameter")
    sp.add_argument("--r0", type=float, required=True, help="inner boundary radius")
    sp.add_argument("--tmax", type=float, default=8.0, help="flow-time horizon")
    common(sp)

    sp = sub.add_parser("symmetric", help="tabulated rotationally symmetric metric")
    sp.add_argument("--mass-fn", required=True,
                    help="CSV with header r,m (strictly increasing r)")
    sp.add_argument("--alpha", type=float, default=0.0,
                    help="boundary value of the harmonic potential, in [0, 1)")
    sp.add_argument("--tmax", type=float, default=None, help="flow-time horizon")
    common(sp)

    sp = sub.add_parser("corpus", help="bounds for every mesh in a directory")
    sp.add_argument("directory")
    sp.add_argument("--bem", action="store_true")
    common(sp)
    return p


def parse_config(argv: list[str]) -> RunConfig:
    ns = _build_parser().parse_args(argv)
    emit = {tok for tok in ns.emit.split(",") if tok} if ns.emit else set()
    threads = int(os.environ.get("CAPBOUND_THREADS", "0") or 0)
    if threads <= 0:
        threads = min(4, os.cpu_count() or 1)
    cfg = RunConfig(
        command=ns.command,
        inputs=[getattr(ns, "mesh", None) or getattr(ns, "directory", None) or
                getattr(ns, "mass_fn", None) or ""],
        with_bem=getattr(ns, "bem", False),
        tolerance=ns.tol,
        out_dir=ns.out,
        emit=emit,
        m=getattr(ns, "m", None),
        r0=getattr(ns, "r0", None),
        mass_fn=getattr(ns, "mass_fn", None),
        alpha=getattr(ns, "alpha", 0.0),
        t_max=getattr(ns, "tmax", None),
        threads=threads,
    )
    if cfg.command == "capacity":
        cfg.inputs += list(getattr(ns, "refine", None) or [])
    return cfg


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


_PRIMITIVE_KINDS = ("sphere", "spheroid", "box", "torus")


def _get_mesh(arg: str) -> tuple[TriMesh, str]:
    """Mesh argument: a file path, or a generator spec like ``sphere:1:3``.

    Generator specs are ``kind:dim[:dim...]:subdivisions`` with the kinds of
    make_primitive.  Returns the mesh and a stem for output file names.
    """
    kind, _, rest = arg.partition(":")
    if rest and kind in _PRIMITIVE_KINDS:
        try:
            params = [float(x) for x in rest.split(":")]
        except ValueError as exc:
            raise ValueError(f"bad generator parameters in {arg!r}") from exc
        return make_primitive(kind, *params), arg.replace(":", "_").replace(".", "p")
    return load_mesh(arg), Path(arg).stem


def _finish(config: RunConfig, payload: dict) -> int:
    print(canonical_json(payload), end="")
    return 0


def _cmd_measure(config: RunConfig) -> int:
    mesh, stem = _get_mesh(config.inputs[0])
    m = measure(mesh)
    payload = envelope("measures", config.echo(), {
        "mesh": {"vertices": mesh.num_vertices, "edges": mesh.num_edges,
                 "faces": mesh.num_faces,
                 "euler_characteristic": mesh.euler_characteristic},
        "measures": m,
    }, __version__)
    if "json" in config.emit:
        write_json(_out_dir(config) / f"{stem}_measures.json", payload)
    return _finish(config, payload)


def _cmd_capacity(config: RunConfig) -> int:
    loaded = [_get_mesh(p) for p in config.inputs]
    meshes = [mesh for mesh, _ in loaded]
    sol = solve_capacity(meshes[0], config.tolerance)
    body = {
        "capacity": sol.capacity,
        "residual": sol.residual,
        "mesh_size": sol.mesh_size,
        "condition_estimate": sol.condition_estimate,
        "error_estimate": sol.error_estimate,
        "density": {"min": float(sol.density.min()),
                    "max": float(sol.density.max()),
                    "mean": float(sol.density.mean())},
    }
    if len(meshes) >= 3:
        c_star, order = refine_capacity(meshes, config.tolerance)
        body["extrapolated"] = {"capacity": c_star, "order": order}
    payload = envelope("capacity", config.echo(), body, __version__)
    if "json" in config.emit:
        write_json(_out_dir(config) / f"{loaded[0][1]}_capacity.json", payload)
    return _finish(config, payload)


def _cmd_bounds(config: RunConfig) -> int:
    mesh, stem = _get_mesh(config.inputs[0])
    report = bound_report(mesh, with_bem=config.with_bem,
                          tolerance=config.tolerance)
    emit_report(report, config.emit, _out_dir(config), stem,
                config.echo(), __version__)
    payload = envelope("bound_report", config.echo(),
                       bound_report_payload(report), __version__)
    return _finish(config, payload)


def _cmd_schwarzschild(config: RunConfig) -> int:
    m, r0 = config.m, config.r0
    forms = schwarzschild_closed_forms(m, r0)
    metric = schwarzschild_metric(m, r0)
    cap_quad, _ = radial_capacity(metric, 0.0)
    g0 = geometry_at(metric, r0)
    bm = bray_miao_bound(g0.area, g0.mean_curvature**2 * g0.area)
    profile = imcf_profile(g0.area, g0.hawking_mass)
    profile_bound, _ = optimal_profile_bound(profile)
    mass_check = mass_bound_check(metric)
    scan = imcf_trace(metric, config.t_max, _TRACE_STEPS)
    body = {
        "m": m,
        "r0": r0,
        "capacity_closed_form": forms.capacity,
        "capacity_quadrature": cap_quad,
        "capacity_imcf_profile": profile_bound,
        "bray_miao": bm,
        "alpha": mass_check.alpha,
        "mass_bound": mass_check.bound,
        "adm_mass": mass_check.total_mass,
        "equality": {
            "capacity_attains_bound": bool(
                abs(bm - forms.capacity) <= 1e-9 * max(1.0, abs(bm))),
            "mass_bound": mass_check.equality,
        },
        "flags": {
            "scalar_nonnegative": scan.scalar_nonnegative,
            "hawking_monotone": scan.hawking_monotone,
        },
    }
    if m >= 0:
        static = static_check(m, r0)
        body["static"] = {"min_n_squared": static.min_n_squared,
                          "willmore_term": static.willmore_term,
                          "equality": static.equality}
    payload = envelope("schwarzschild", config.echo(), body, __version__)
    out = _out_dir(config)
    stem = f"schwarzschild_m{m:g}_r0{r0:g}"
    if "json" in config.emit:
        write_json(out / f"{stem}.json", payload)
    if "csv" in config.emit:
        ts = np.linspace(0.0, config.t_max, _TRACE_STEPS)
        big_t = profile.T(ts)
        fs = np.array([forms.f0(float(t)) for t in ts])
        write_csv(out / f"{stem}_profile.csv", PROFILE_CSV_HEADER,
                  [[ts[i], big_t[i], fs[i]] for i in range(len(ts))])
        write_csv(out / f"{stem}_radial.csv", RADIAL_CSV_HEADER,
                  radial_scan_csv_rows(scan))
    if "svg" in config.emit:
        ts = np.linspace(0.0, config.t_max, _TRACE_STEPS)
        plot_profile(ts, profile.T(ts),
                     np.array([forms.f0(float(t)) for t in ts]),
                     out / f"{stem}_profile.svg")
        plot_hawking_trace(scan, out / f"{stem}_radial.svg")
    return _finish(config, payload)


def _cmd_symmetric(config: RunConfig) -> int:
    metric = tabulated_metric_from_csv(config.mass_fn)
    t_max = config.t_max
    if t_max is None:
        t_max = 2.0 * math.log(4.0 * metric.r_max / metric.r0)
    cap, _ = radial_capacity(metric, config.alpha)
    mass_check = mass_bound_check(metric)
    scan = imcf_trace(metric, t_max, _TRACE_STEPS)
    body = {
        "r0": metric.r0,
        "r_max": metric.r_max,
        "adm_mass": adm_mass(metric),
        "alpha_boundary_value": config.alpha,
        "far_field_coefficient": cap,
        "mass_bound": None if mass_check.status != "ok" else mass_check.bound,
        "mass_bound_alpha": mass_check.alpha,
        "mass_bound_holds": mass_check.holds,
        "mass_bound_equality": mass_check.equality,
        "mass_bound_status": mass_check.status,
        "flags": {
            "scalar_nonnegative": scan.scalar_nonnegative,
            "hawking_monotone": scan.hawking_monotone,
        },
    }
    payload = envelope("symmetric", config.echo(), body, __version__)
    stem = Path(config.mass_fn).stem + "_symmetric"
    out = _out_dir(config)
    if "json" in config.emit:
        write_json(out / f"{stem}.json", payload)
    if "csv" in config.emit:
        write_csv(out / f"{stem}_radial.csv", RADIAL_CSV_HEADER,
                  radial_scan_csv_rows(scan))
    if "svg" in config.emit:
        plot_hawking_trace(scan, out / f"{stem}_radial.svg")
    return _finish(config, payload)


def _cmd_corpus(config: RunConfig) -> int:
    root = Path(config.inputs[0])
    if not root.is_dir():
        raise MeshError(f"{root} is not a directory")
    paths = sorted(p for p in root.iterdir()
                   if p.suffix.lower() in (".obj", ".ply"))
    if not paths:
        raise MeshError(f"no .obj/.ply meshes in {root}")

    def solve(path: Path) -> BoundReport:
        return bound_report(load_mesh(path), with_bem=config.with_bem,
                            tolerance=config.tolerance)

    if config.threads > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            reports = list(pool.map(solve, paths))
    else:
        reports = [solve(p) for p in paths]

    out = _out_dir(config)
    named = [(p.stem, r) for p, r in zip(paths, reports)]
    rows = [bound_report_csv_row(name, r) for name, r in named]
    if "json" in config.emit:
        for (name, r) in named:
            write_json(out / f"{name}_bounds.json",
                       envelope("bound_report", config.echo(),
                                bound_report_payload(r), __version__))
    if "csv" in config.emit:
        write_csv(out / "corpus_summary.csv", BOUNDS_CSV_HEADER, rows)
    if "svg" in config.emit:
        plot_bound_comparison(named, out / "corpus_summary.svg")
    payload = envelope("corpus_summary", config.echo(), {
        "rows": [dict(zip(BOUNDS_CSV_HEADER, row)) for row in rows],
    }, __version__)
    return _finish(config, payload)


_COMMANDS = {
    "measure": _cmd_measure,
    "capacity": _cmd_capacity,
    "bounds": _cmd_bounds,
    "schwarzschild": _cmd_schwarzschild,
    "symmetric": _cmd_symmetric,
    "corpus": _cmd_corpus,
}


def run(config: RunConfig) -> int:
    """Execute a validated configuration; returns the process exit code."""
    try:
        return _COMMANDS[config.command](config)
    except NumericalError as exc:
        print(canonical_json({
            "schema": "capbound/1",
            "error": {"type": "numerical", "message": str(exc)},
        }), end="")
        return 2
    except (MeshError, ValueError, OSError) as exc:
        print(canonical_json({
            "schema": "capbound/1",
            "error": {"type": "input", "message": str(exc)},
        }), end="")
        return 1


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except CapboundError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
