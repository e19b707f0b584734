"""Command-line interface: ``hslab <command> [flags] [--config file.json]``.

Every command resolves its parameters from built-in defaults, then the
flags given on the command line, then the optional JSON config file, and
writes the resolved document to ``effective-config.json`` in the output
directory next to its other outputs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 erosion invariant violation.
"""

from __future__ import annotations

import functools
import json
import math
import os
import sys
from pathlib import Path

import click

from .config import fmt
from .errors import (AdjacencyError, ConfigError, HslabError, InvariantViolation,
                     OverlapError, ParameterError, SourceOutsideError)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_INVARIANT = 4

_CONFIG_ERRORS = (ConfigError, ParameterError, OverlapError, SourceOutsideError,
                  AdjacencyError, json.JSONDecodeError, KeyError, TypeError)


def _guard(fn):
    """Map package exceptions to the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InvariantViolation as exc:
            click.echo(f"invariant violation: {exc}", err=True)
            out = kwargs.get("out")
            if out and exc.replay is not None:
                Path(out).mkdir(parents=True, exist_ok=True)
                from .erosion.io import dumps_json

                (Path(out) / "replay.json").write_text(dumps_json(_jsonable(exc.replay)))
            sys.exit(EXIT_INVARIANT)
        except _CONFIG_ERRORS as exc:
            click.echo(f"configuration error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except (HslabError, ArithmeticError, ValueError, RuntimeError) as exc:
            click.echo(f"numerical failure: {type(exc).__name__}: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)

    return wrapper


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def _parse_value(text):
    """Flags accept JSON literals (numbers, lists); anything else stays a string."""
    if text is None:
        return None
    try:
        return json.loads(text)
    except (json.JSONDecodeError, TypeError):
        return text


def resolve(defaults: dict, flags: dict, config_path) -> dict:
    """Merge defaults, command-line flags and a JSON config file (highest priority)."""
    cfg = dict(defaults)
    for k, v in flags.items():
        if v is not None:
            cfg[k] = _parse_value(v) if isinstance(v, str) else v
    if config_path:
        doc = json.loads(Path(config_path).read_text())
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(doc) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(doc)
    return cfg


def _write(out: Path, name: str, text: str):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _echo_config(out: Path, command: str, cfg: dict):
    from .erosion.io import dumps_json

    doc = {"schema": "hslab.config/1", "command": command, "parameters": cfg}
    _write(out, "effective-config.json", dumps_json(doc))


def _points(lst, name):
    try:
        return [(complex(p[0], p[1]), float(p[2])) for p in lst]
    except (TypeError, IndexError, ValueError) as exc:
        raise ConfigError(f"{name} must be a list of [x, y, weight] triples") from exc


def _common(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                      help="JSON file whose keys override the flags.")(fn)
    fn = click.option("--out", default="hslab-out", show_default=True,
                      help="Output directory.")(fn)
    return fn


@click.group()
@click.version_option(package_name="artifact")
def cli():
    """Numerical laboratory for competitive Hele-Shaw flow."""


# ---------------------------------------------------------------- trace-qd
@cli.command("trace-qd")
@click.option("--a0", help="Weight of the source at 0.")
@click.option("--a1", help="Weight of the source at 1.")
@click.option("--a-inf", "a_inf", help="Weight of the source at infinity.")
@click.option("--step", help="Trajectory step size.")
@_common
@_guard
def trace_qd(a0, a1, a_inf, step, out, config_path):
    """Critical graph of the three-source quadratic differential."""
    from .erosion.io import dumps_json
    from .quad_diff import build_three_source, critical_graph, finite_critical_points
    from .svg import Style, emit_svg

    cfg = resolve({"a0": 2.0, "a1": 1.0, "a_inf": 0.0, "step": 1e-3},
                  {"a0": a0, "a1": a1, "a_inf": a_inf, "step": step}, config_path)
    out = Path(out)
    qd = build_three_source(float(cfg["a0"]), float(cfg["a1"]), float(cfg["a_inf"]))
    graph = critical_graph(qd, step=float(cfg["step"]))
    crit = finite_critical_points(qd)
    edges = []
    curves = []
    for k, e in enumerate(graph.edges):
        name = f"edge_{k}.csv"
        if len(e.curve):
            _write(out, name, e.curve.to_csv())
            curves.append((e.curve, Style(stroke="#1f77b4" if e.curve.closed else "#d62728")))
        edges.append({"file": name, "start": e.start, "end": e.end, "status": e.status,
                      "closed": e.curve.closed, "points": len(e.curve), "error": e.error})
    doc = {"schema": "hslab.critical-graph/1",
           "critical_points": [{"point": [z.real, z.imag], "order": m} for z, m in crit],
           "edges": edges}
    _write(out, "graph.json", dumps_json(doc))
    emit_svg(curves, out / "graph.svg")
    _echo_config(out, "trace-qd", cfg)
    click.echo(f"{len(edges)} edges, {len(crit)} critical points -> {out}")


# -------------------------------------------------------------- lemniscate
@cli.command("lemniscate")
@click.option("--pos", help="JSON list of [x, y, weight] where R -> +inf.")
@click.option("--neg", help="JSON list of [x, y, weight] where R -> -inf.")
@click.option("--offset", help="Additive constant of R.")
@click.option("--level", help="Level value.")
@click.option("--seed", "seed_point", help="JSON [x, y] starting point.")
@click.option("--step", help="Step size (default: automatic).")
@_common
@_guard
def lemniscate(pos, neg, offset, level, seed_point, step, out, config_path):
    """Trace a level line of a sum of logarithmic potentials."""
    from .erosion.io import dumps_json
    from .kernels import WeightedDivisor
    from .stationary import LevelPotential, trace_level
    from .svg import emit_svg

    cfg = resolve({"pos": [[0.0, 0.0, 1.0]], "neg": [], "offset": 0.0,
                   "level": 0.0, "seed": [0.5, 0.0], "step": None},
                  {"pos": pos, "neg": neg, "offset": offset, "level": level,
                   "seed": seed_point, "step": step}, config_path)
    out = Path(out)
    R = LevelPotential(WeightedDivisor(tuple(_points(cfg["pos"], "pos"))),
                       WeightedDivisor(tuple(_points(cfg["neg"], "neg"))), float(cfg["offset"]))
    s = cfg["seed"]
    curve = trace_level(R, float(cfg["level"]), complex(s[0], s[1]),
                        step=None if cfg["step"] is None else float(cfg["step"]))
    _write(out, "curve.csv", curve.to_csv())
    meta = {k: v for k, v in curve.meta.items() if isinstance(v, (bool, int, float, str))}
    _write(out, "curve.json", dumps_json({"schema": "hslab.curve/1", "closed": curve.closed,
                                          "status": curve.status, "points": len(curve),
                                          "meta": meta}))
    emit_svg([curve], out / "curve.svg")
    _echo_config(out, "lemniscate", cfg)
    click.echo(f"{len(curve)} points, closed={curve.closed} -> {out}")


# ------------------------------------------------------------ four-droplet
@cli.command("four-droplet")
@click.option("--x1", help="Source of D1 in (-1, 1).")
@click.option("--x2", help="Source of D2 in (-1, 1).")
@click.option("--a", help="Weight at x1.")
@click.option("--b", help="Weight at x2.")
@click.option("--step", help="Step size.")
@_common
@_guard
def four_droplet(x1, x2, a, b, step, out, config_path):
    """Level-0 interfaces of the four-droplet configuration."""
    from .erosion.io import dumps_json
    from .stationary import FourDropletSpec, four_droplet_curves
    from .svg import Style, emit_svg

    cfg = resolve({"x1": -0.9, "x2": 0.9, "a": 6.0, "b": 1.0, "step": 1e-3},
                  {"x1": x1, "x2": x2, "a": a, "b": b, "step": step}, config_path)
    out = Path(out)
    spec = FourDropletSpec(float(cfg["x1"]), float(cfg["x2"]), float(cfg["a"]), float(cfg["b"]))
    res = four_droplet_curves(spec, step=float(cfg["step"]))
    files = []
    curves = [(res["circle"], Style(stroke="#7f7f7f", dash="0.02,0.02"))]
    for kind in ("inner", "outer"):
        for k, c in enumerate(res[kind]):
            name = f"{kind}_{k}.csv"
            _write(out, name, c.to_csv())
            files.append(name)
            curves.append((c, Style(stroke="#1f77b4" if kind == "inner" else "#d62728")))
    _write(out, "four-droplet.json", dumps_json({"schema": "hslab.four-droplet/1", "files": files}))
    emit_svg(curves, out / "four-droplet.svg")
    _echo_config(out, "four-droplet", cfg)
    click.echo(f"{len(files)} curves -> {out}")


# ------------------------------------------------------------------ energy
@cli.command("energy")
@click.option("--domain", help="disc | exterior | mobius")
@click.option("--center", help="JSON [x, y] center of the disc.")
@click.option("--radius", help="Disc radius.")
@click.option("--mobius", help="JSON [[re, im] x 4] coefficients a, b, c, d.")
@click.option("--divisor", help="JSON list of [x, y, weight].")
@_common
@_guard
def energy(domain, center, radius, mobius, divisor, out, config_path):
    """Reduced Green's energy of a disc-like domain."""
    from .erosion.io import dumps_json
    from .kernels import WeightedDivisor
    from .stationary import MobiusDomain, reduced_energy_general

    cfg = resolve({"domain": "disc", "center": [0.0, 0.0], "radius": 1.0, "mobius": None,
                   "divisor": [[0.0, 0.0, 1.0]]},
                  {"domain": domain, "center": center, "radius": radius, "mobius": mobius,
                   "divisor": divisor}, config_path)
    out = Path(out)
    c = complex(*cfg["center"])
    if cfg["domain"] == "disc":
        dom = MobiusDomain.disc(c, float(cfg["radius"]))
    elif cfg["domain"] == "exterior":
        dom = MobiusDomain.disc_exterior(c, float(cfg["radius"]))
    elif cfg["domain"] == "mobius":
        if not cfg["mobius"] or len(cfg["mobius"]) != 4:
            raise ConfigError("mobius needs four complex coefficients")
        dom = MobiusDomain(*[complex(*z) for z in cfg["mobius"]])
    else:
        raise ConfigError(f"unknown domain {cfg['domain']!r}")
    d = WeightedDivisor(tuple(_points(cfg["divisor"], "divisor")))
    value = reduced_energy_general(dom, d)
    _write(out, "energy.json", dumps_json({"schema": "hslab.energy/1", "energy": value}))
    _echo_config(out, "energy", cfg)
    click.echo(fmt(value))


# --------------------------------------------------------------- variation
@cli.command("variation")
@click.option("--center", help="JSON [x, y] circle center.")
@click.option("--radius", help="Circle radius.")
@click.option("--inner", help="JSON list of [x, y, weight] inside the circle.")
@click.option("--outer", help="JSON list of [x, y, weight] outside; [\"inf\", 0, w] for infinity.")
@_common
@_guard
def variation(center, radius, inner, outer, out, config_path):
    """Competitive variations of energy, area and perimeter on a circle."""
    from .erosion.io import dumps_json
    from .kernels import INF, WeightedDivisor
    from .stationary import Circle, area_perimeter_variation, hadamard_gradient_quadrature

    cfg = resolve({"center": [0.0, 0.0], "radius": 1.0, "inner": [[0.0, 0.0, 1.0]],
                   "outer": [["inf", 0.0, 1.0]]},
                  {"center": center, "radius": radius, "inner": inner, "outer": outer},
                  config_path)
    out = Path(out)
    circ = Circle(complex(*cfg["center"]), float(cfg["radius"]))
    d = WeightedDivisor(tuple(_points(cfg["inner"], "inner")))
    atoms = []
    for p in cfg["outer"]:
        if p[0] == "inf":
            atoms.append((INF, float(p[2])))
        else:
            atoms.append((complex(p[0], p[1]), float(p[2])))
    dstar = WeightedDivisor(tuple(atoms))
    grad = hadamard_gradient_quadrature(circ, d, dstar)
    area, perim = area_perimeter_variation(circ, d, dstar)
    doc = {"schema": "hslab.variation/1", "energy_gradient": grad, "area": area,
           "perimeter": perim}
    _write(out, "variation.json", dumps_json(doc))
    _echo_config(out, "variation", cfg)
    click.echo(f"gradient {fmt(grad)} area {fmt(area)} perimeter {fmt(perim)}")


# ----------------------------------------------------------------- surface
@cli.command("surface")
@click.option("--surface-json", "surface_json", help="Path to a GreensTypeSurface JSON document.")
@click.option("--example", help="Built-in example: slit-plane.")
@_common
@_guard
def surface(surface_json, example, out, config_path):
    """Validate a half-translation surface of Green's type and draw its layout."""
    from .curves import PathCurve
    from .erosion.io import dumps_json
    from .greens_surface import (GreensTypeSurface, layout, slit_plane_surface,
                                 validate_greens_type)
    from .svg import Style, emit_svg

    cfg = resolve({"surface_json": None, "example": "slit-plane", "depth": -6.0},
                  {"surface_json": surface_json, "example": example}, config_path)
    out = Path(out)
    if cfg["surface_json"]:
        S = GreensTypeSurface.from_json(Path(cfg["surface_json"]).read_text())
    elif cfg["example"] == "slit-plane":
        S = slit_plane_surface()
    else:
        raise ConfigError(f"unknown example {cfg['example']!r}")
    rep = validate_greens_type(S)
    doc = {"schema": "hslab.surface-report/1", "valid": rep.valid,
           "issues": [{"kind": i.kind, "detail": i.detail} for i in rep.issues]}
    _write(out, "validation.json", dumps_json(doc))
    _write(out, "surface.json", S.to_json() + "\n")
    curves = []
    y0 = 0.0
    for k, piece in enumerate(S.pieces):
        for _, verts in layout(piece, float(cfg["depth"])):
            curves.append((PathCurve([v + complex(0, y0) for v in verts], closed=True),
                           Style(stroke="#1f77b4")))
        y0 += piece.height + 0.5
    emit_svg(curves, out / "layout.svg")
    _echo_config(out, "surface", cfg)
    click.echo(f"valid={rep.valid} ({len(rep.issues)} issues)")
    if not rep.valid:
        sys.exit(EXIT_NUMERIC)


# ------------------------------------------------------------------- erode
_ERODE_DEFAULTS = {
    "surface": "plane", "mesh": 20, "sources": [[0.0, 0.0, 2.0], [1.0, 0.0, 1.0]],
    "radius": 0.2, "torus_domain": [-0.5, -1.0, 2.0, 2.0], "t_end": 1.0, "seed": 0,
    "mode": "poisson", "snapshots": [], "check_every": 1000, "svg": True,
}


@cli.command("erode")
@click.option("--surface", "surface_kind", help="plane | torus")
@click.option("--mesh", help="Lattice resolution N (mesh size 1/N).")
@click.option("--sources", help="JSON list of [x, y, rate]; one droplet per source.")
@click.option("--radius", help="Radius of the initial discs.")
@click.option("--torus-domain", "torus_domain", help="JSON [x0, y0, width, height].")
@click.option("--t-end", "t_end", help="Macroscopic end time.")
@click.option("--seed", help="Random seed.")
@click.option("--mode", help="poisson | round-robin")
@click.option("--snapshots", help="JSON list of snapshot times.")
@click.option("--check-every", "check_every", help="Full invariant check interval (events).")
@_common
@_guard
def erode(surface_kind, mesh, sources, radius, torus_domain, t_end, seed, mode, snapshots,
          check_every, out, config_path):
    """Run interface erosion and write snapshots and the event log."""
    from .compare import StudyConfig, initial_state, lattice_interface_to_curve
    from .erosion import Simulation, event_log_csv, to_snapshot
    from .erosion.io import dumps_json
    from .svg import CellRaster, Style, emit_svg

    cfg = resolve(_ERODE_DEFAULTS, {
        "surface": surface_kind, "mesh": mesh, "sources": sources, "radius": radius,
        "torus_domain": torus_domain, "t_end": t_end, "seed": seed, "mode": mode,
        "snapshots": snapshots, "check_every": check_every}, config_path)
    out = Path(out)
    study = StudyConfig(surface=cfg["surface"], meshes=[int(cfg["mesh"])], seeds=[int(cfg["seed"])],
                        time=float(cfg["t_end"]), sources=cfg["sources"], radius=float(cfg["radius"]),
                        droplet=0, mode=cfg["mode"], torus_domain=cfg["torus_domain"], target=None)
    study.validate()
    state = initial_state(study, int(cfg["mesh"]))
    sim = Simulation(state, cfg["mode"], int(cfg["seed"]), int(cfg["check_every"]))
    times = sorted(float(t) for t in cfg["snapshots"])
    snaps = [to_snapshot(state, 0.0)] if 0.0 in times else []
    snaps += sim.advance(float(cfg["t_end"]), [t for t in times if t > 0])
    sim._check()
    final = to_snapshot(state)
    _write(out, "snapshots.json", dumps_json({"schema": "hslab.snapshots/1", "snapshots": snaps}))
    _write(out, "final.json", dumps_json(final))
    _write(out, "events.csv", event_log_csv(sim.log))
    summary = dict(sim.stats)
    summary["cell_counts"] = list(state.cell_counts)
    summary["clock"] = state.clock
    _write(out, "summary.json", dumps_json({"schema": "hslab.run-summary/1", **summary}))
    if cfg["svg"]:
        curves = [(lattice_interface_to_curve(state, d), Style(stroke="#000000", width=1.0))
                  for d in range(state.n)]
        emit_svg(curves, out / "final.svg", cells=CellRaster.from_state(state))
    _echo_config(out, "erode", cfg)
    click.echo(f"{summary['events']} events, cells {summary['cell_counts']} -> {out}")


# ----------------------------------------------------------------- compare
_COMPARE_DEFAULTS = {
    "surface": "plane", "meshes": [10, 20, 40], "seeds": list(range(10)), "time": 50.0,
    "sources": [[0.0, 0.0, 2.0], [1.0, 0.0, 1.0]], "radius": 0.2, "droplet": 1,
    "mode": "poisson", "torus_domain": [-0.5, -1.0, 2.0, 2.0], "stabilization": [],
    "target": "three-source-loop", "check_every": 0,
}


@cli.command("compare")
@click.option("--surface", "surface_kind", help="plane | torus")
@click.option("--meshes", help="JSON list of resolutions N.")
@click.option("--seeds", help="JSON list of seeds.")
@click.option("--time", "time_", help="Macroscopic time of the comparison.")
@click.option("--droplet", help="Index of the compared droplet.")
@click.option("--stabilization", help="JSON list of [t, t2] pairs.")
@click.option("--target", help="three-source-loop | none")
@_common
@_guard
def compare(surface_kind, meshes, seeds, time_, droplet, stabilization, target, out, config_path):
    """Convergence study of lattice interfaces against a continuum curve."""
    from .compare import StudyConfig, convergence_study
    from .erosion.io import dumps_json

    cfg = resolve(_COMPARE_DEFAULTS, {
        "surface": surface_kind, "meshes": meshes, "seeds": seeds, "time": time_,
        "droplet": droplet, "stabilization": stabilization, "target": target}, config_path)
    if cfg["target"] in ("none", None):
        cfg["target"] = None
    out = Path(out)
    report = convergence_study(StudyConfig(**cfg))
    _write(out, "report.json", dumps_json(report.to_dict()))
    _write(out, "report.csv", report.to_csv())
    _echo_config(out, "compare", cfg)
    for s in report.summary:
        med = s["hausdorff"]["median"]
        click.echo(f"N={s['mesh']}: median hausdorff {fmt(med) if med is not None else '-'}")


def main(argv=None):
    cli.main(args=argv, prog_name="hslab")


if __name__ == "__main__":
    main()
