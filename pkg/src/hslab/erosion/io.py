"""Snapshot (JSON) and event-log (CSV) formats for erosion runs."""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from ..config import fmt
from ..errors import ConfigError
from ..lattice import surface_from_dict, surface_to_dict
from .state import ErosionState, Source, check_invariants

SNAPSHOT_SCHEMA = "hslab.snapshot/1"
EVENT_LOG_SCHEMA = "hslab.events/1"
EVENT_LOG_HEADER = ("time", "source", "walk_length", "outcome", "cell_i", "cell_j")


def rle_rows(cells) -> list:
    """Run-length encode cells as ``[[j, [[i_start, length], ...]], ...]``."""
    rows: dict = {}
    for i, j in sorted(cells, key=lambda c: (c[1], c[0])):
        runs = rows.setdefault(int(j), [])
        if runs and runs[-1][0] + runs[-1][1] == i:
            runs[-1][1] += 1
        else:
            runs.append([int(i), 1])
    return [[j, rows[j]] for j in sorted(rows)]


def rle_decode(rows) -> list:
    return [(i0 + k, j) for j, runs in rows for i0, n in runs for k in range(n)]


def to_snapshot(state: ErosionState, time: float | None = None) -> dict:
    """Immutable JSON-ready view of ``state``."""
    droplets = []
    for d in range(state.n):
        droplets.append({
            "sources": [{"cell": list(s.cell), "rate": s.rate}
                        for s in state.sources if s.droplet == d],
            "cells": rle_rows(_owned_cells(state, d)),
            "interface": [list(v) for v in state.interface_vertices(d)],
        })
    return {
        "schema": SNAPSHOT_SCHEMA,
        "time": state.clock if time is None else float(time),
        "clock": state.clock,
        "events": state.events,
        "mesh": state.mesh,
        "surface": surface_to_dict(state.surface),
        "droplets": droplets,
    }


def _owned_cells(state: ErosionState, d: int) -> list:
    a, b = np.nonzero(state.owner == d)
    return list(zip((a + state.ox).tolist(), (b + state.oy).tolist()))


def from_snapshot(snap: dict) -> ErosionState:
    """Rebuild a state from :func:`to_snapshot` output and validate it."""
    if snap.get("schema") != SNAPSHOT_SCHEMA:
        raise ConfigError(f"unsupported snapshot schema {snap.get('schema')!r}")
    surface = surface_from_dict(snap["surface"])
    sources, droplets = [], []
    for d, dr in enumerate(snap["droplets"]):
        for s in dr["sources"]:
            sources.append(Source(d, tuple(s["cell"]), float(s["rate"])))
        droplets.append(rle_decode(dr["cells"]))
    from .state import from_cells

    st = from_cells(surface, droplets, sources)
    for d, dr in enumerate(snap["droplets"]):
        st.set_interface(d, [tuple(v) for v in dr["interface"]])
    st.clock = float(snap["clock"])
    st.events = int(snap.get("events", 0))
    check_invariants(st)
    return st


def _round_floats(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def dumps_json(obj) -> str:
    """Deterministic JSON: sorted keys, floats at the fixed precision."""
    return json.dumps(_round_floats(obj), sort_keys=True, separators=(",", ":")) + "\n"


def event_log_csv(rows) -> str:
    """RFC-4180 CSV of event-log rows ``(time, source, walk_length, outcome, i, j)``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(EVENT_LOG_HEADER)
    for t, j, n, outcome, ci, cj in rows:
        w.writerow([fmt(t), j, n, outcome, ci, cj])
    return buf.getvalue()
