"""Lattice-to-continuum comparison: Hausdorff metrics and convergence studies."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import fmt
from .curves import CLOSED, PathCurve, hausdorff_curves
from .errors import ConfigError, EmptyCurveError, MissingDropletError
from .erosion import Simulation, init_circles
from .erosion.state import ErosionState
from .lattice import Plane, Torus, vertex_position

REPORT_SCHEMA = "hslab.comparison/1"


def hausdorff(a: PathCurve, b: PathCurve, step: float | None = None) -> float:
    """Symmetric Hausdorff distance between densely resampled polylines."""
    if len(a) == 0 or len(b) == 0:
        raise EmptyCurveError("hausdorff needs two nonempty curves")
    return hausdorff_curves(a, b, step)


def lattice_interface_to_curve(state: ErosionState, droplet: int) -> PathCurve:
    """Interface of ``droplet`` as a closed curve in continuum coordinates.

    On the torus the walk is kept unrolled (continuous in the universal
    cover) and translated by a deck transformation so that its first vertex
    lies in the fundamental domain. ``meta["cuts"]`` lists the segments
    that cross the boundary of the fundamental domain and
    ``meta["deck_shift"]`` the applied translation.
    """
    if not 0 <= droplet < state.n:
        raise MissingDropletError(f"no droplet {droplet}")
    v = np.array(state.interface_vertices(droplet), dtype=np.int64)
    meta = {"droplet": droplet, "mesh": state.mesh}
    surf = state.surface
    if isinstance(surf, Torus):
        W, H = surf.width_cells, surf.height_cells
        sx, sy = -(v[0, 0] // W), -(v[0, 1] // H)
        v = v + np.array([sx * W, sy * H])
        wrapped = np.column_stack([v[:, 0] // W, v[:, 1] // H])
        jumps = np.any(np.roll(wrapped, -1, axis=0) != wrapped, axis=1)
        meta["cuts"] = np.nonzero(jumps)[0].tolist()
        meta["deck_shift"] = [int(sx), int(sy)]
        meta["periods"] = [surf.width, surf.height]
    ox, oy = surf.origin
    pts = (ox + surf.mesh * v[:, 0]) + 1j * (oy + surf.mesh * v[:, 1])
    return PathCurve(pts, closed=True, status=CLOSED, meta=meta)


def torus_hausdorff(a: PathCurve, b: PathCurve, periods, reach: int = 2) -> float:
    """Hausdorff distance minimised over deck translations of ``b``."""
    w, h = periods
    best = math.inf
    ca = np.mean(a.points)
    cb = np.mean(b.points)
    # Start from the translation that best aligns the centroids.
    m0 = round((ca - cb).real / w)
    n0 = round((ca - cb).imag / h)
    for m in range(m0 - reach, m0 + reach + 1):
        for n in range(n0 - reach, n0 + reach + 1):
            shifted = PathCurve(b.points + complex(m * w, n * h), closed=b.closed)
            best = min(best, hausdorff(a, shifted))
    return best


def three_source_loop(a0=2.0, a1=1.0, a_inf=0.0, step: float = 1e-3) -> PathCurve:
    """Closed separatrix loop of the three-source differential."""
    from .quad_diff import build_three_source, critical_graph

    loops = critical_graph(build_three_source(a0, a1, a_inf), step=step).closed_loops()
    if not loops:
        raise EmptyCurveError("the critical graph has no closed loop")
    return loops[0].curve


@dataclass
class StudyConfig:
    """Parameters of a convergence study.

    ``meshes`` holds the lattice resolutions ``N`` (mesh ``1/N``). Each
    droplet is initialised as a disc of ``radius`` around its source.
    ``stabilization`` lists time pairs ``(t, t2)`` at which the compared
    interface is measured against itself.
    """

    surface: str = "plane"
    meshes: list = field(default_factory=lambda: [10, 20, 40])
    seeds: list = field(default_factory=lambda: list(range(10)))
    time: float = 50.0
    sources: list = field(default_factory=lambda: [[0.0, 0.0, 2.0], [1.0, 0.0, 1.0]])
    radius: float = 0.2
    droplet: int = 1
    mode: str = "poisson"
    torus_domain: list = field(default_factory=lambda: [-0.5, -1.0, 2.0, 2.0])
    stabilization: list = field(default_factory=list)
    target: str | None = "three-source-loop"
    check_every: int = 0

    def validate(self) -> "StudyConfig":
        if self.surface not in ("plane", "torus"):
            raise ConfigError(f"surface must be 'plane' or 'torus', got {self.surface!r}")
        if not self.meshes or any(int(n) <= 0 for n in self.meshes):
            raise ConfigError("meshes must be a nonempty list of positive integers")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if not self.time > 0:
            raise ConfigError("time must be positive")
        if not 0 <= self.droplet < len(self.sources):
            raise ConfigError("droplet index out of range")
        for pair in self.stabilization:
            if len(pair) != 2 or not 0 < pair[0] < pair[1]:
                raise ConfigError(f"bad stabilization pair {pair}")
        return self


def make_surface(cfg: StudyConfig, n: int):
    if cfg.surface == "plane":
        return Plane(1.0 / n)
    x0, y0, w, h = cfg.torus_domain
    wc, hc = round(w * n), round(h * n)
    if abs(wc - w * n) > 1e-9 or abs(hc - h * n) > 1e-9:
        raise ConfigError("torus domain must be a whole number of cells at every mesh")
    return Torus(int(wc), int(hc), 1.0 / n, (float(x0), float(y0)))


def initial_state(cfg: StudyConfig, n: int) -> ErosionState:
    surf = make_surface(cfg, n)
    specs = [(complex(x, y), cfg.radius, [(complex(x, y), float(a))]) for x, y, a in cfg.sources]
    return init_circles(surf, specs)


def _one_run(cfg: StudyConfig, n: int, seed: int, target: PathCurve | None) -> dict:
    st = initial_state(cfg, n)
    sim = Simulation(st, cfg.mode, seed, check_every=cfg.check_every, keep_log=False)
    times = sorted({float(cfg.time)} | {float(t) for p in cfg.stabilization for t in p})
    curves = {}
    for t in times:
        sim.advance(t)
        curves[t] = lattice_interface_to_curve(st, cfg.droplet)
    periods = (st.surface.width, st.surface.height) if isinstance(st.surface, Torus) else None

    def dist(a, b):
        return torus_hausdorff(a, b, periods) if periods else hausdorff(a, b)

    row = {"mesh": n, "seed": seed, "cell_counts": list(st.cell_counts),
           "events": sim.stats["events"], "walk_steps": sim.stats["walk_steps"],
           "reroutes": sim.stats["reroute"]}
    row["hausdorff"] = dist(curves[float(cfg.time)], target) if target is not None else None
    row["stabilization"] = [dist(curves[float(a)], curves[float(b)]) for a, b in cfg.stabilization]
    return row


def _quartiles(xs) -> dict:
    xs = np.asarray([x for x in xs if x is not None], dtype=float)
    if len(xs) == 0:
        return {"q1": None, "median": None, "q3": None}
    q1, med, q3 = np.percentile(xs, [25, 50, 75])
    return {"q1": float(q1), "median": float(med), "q3": float(q3)}


@dataclass
class ComparisonReport:
    """Per-mesh distance statistics of a convergence study."""

    config: dict
    rows: list
    summary: list

    @property
    def meshes(self) -> list:
        return [s["mesh"] for s in self.summary]

    def medians(self, key: str = "hausdorff") -> list:
        return [s[key]["median"] for s in self.summary]

    def to_dict(self) -> dict:
        return {"schema": REPORT_SCHEMA, "config": self.config, "rows": self.rows,
                "summary": self.summary,
                "metric": "Hausdorff distance between the rescaled lattice interface and the "
                          "continuum curve (one reasonable metric for convergence in probability)"}

    def to_csv(self) -> str:
        import csv
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        pairs = self.config.get("stabilization", [])
        w.writerow(["mesh", "seed", "hausdorff"] + [f"stab_{a:g}_{b:g}" for a, b in pairs]
                   + ["cells_" + str(d) for d in range(len(self.config["sources"]))] + ["events"])
        for r in self.rows:
            w.writerow([r["mesh"], r["seed"], "" if r["hausdorff"] is None else fmt(r["hausdorff"])]
                       + [fmt(x) for x in r["stabilization"]] + r["cell_counts"] + [r["events"]])
        return buf.getvalue()


def worker_count() -> int:
    env = os.environ.get("HSLAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"HSLAB_THREADS must be an integer, got {env!r}") from exc
        return max(1, n)
    return os.cpu_count() or 1


def convergence_study(config, target: PathCurve | None = None) -> ComparisonReport:
    """Run erosion over a mesh ladder and seeds and compare with a continuum curve.

    Parameters
    ----------
    config : StudyConfig or dict
    target : PathCurve, optional
        Continuum curve to compare with; defaults to the three-source loop
        when ``config.target == "three-source-loop"``.

    Runs are distributed over a process pool capped by ``HSLAB_THREADS``;
    rows are sorted by ``(mesh, seed)`` so the output does not depend on
    the pool size.
    """
    cfg = config if isinstance(config, StudyConfig) else StudyConfig(**config)
    cfg.validate()
    if target is None and cfg.target == "three-source-loop":
        a0, a1 = cfg.sources[0][2], cfg.sources[1][2]
        target = three_source_loop(a0, a1, 0.0)
    tasks = [(int(n), int(s)) for n in cfg.meshes for s in cfg.seeds]
    workers = min(worker_count(), len(tasks))
    if workers <= 1:
        rows = [_one_run(cfg, n, s, target) for n, s in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_one_run, cfg, n, s, target) for n, s in tasks]
            rows = [f.result() for f in futs]
    rows.sort(key=lambda r: (r["mesh"], r["seed"]))
    summary = []
    for n in sorted({r["mesh"] for r in rows}):
        sub = [r for r in rows if r["mesh"] == n]
        entry = {"mesh": n, "hausdorff": _quartiles([r["hausdorff"] for r in sub]),
                 "stabilization": [_quartiles([r["stabilization"][k] for r in sub])
                                   for k in range(len(cfg.stabilization))]}
        counts = np.array([r["cell_counts"] for r in sub], dtype=float)
        entry["cell_counts_median"] = np.median(counts, axis=0).tolist()
        if counts.shape[1] >= 2:
            entry["area_ratio"] = _quartiles(counts[:, 0] / counts[:, 1])
        summary.append(entry)
    return ComparisonReport(asdict(cfg), rows, summary)
