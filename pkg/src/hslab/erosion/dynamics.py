"""Interface-erosion dynamics: walks, captures, schedules and runs."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit

from ..config import MAX_WALK_STEPS
from ..errors import (EmptyInterfaceError, InvariantViolation, ParameterError,
                      WalkOverflowError)
from ..lattice import DIRECTIONS, Rng
from .state import FREE, ErosionState, check_invariants

# Lattice step index (E, W, N, S) -> primal edge key of the crossed edge,
# relative to the cell the step starts from.
_EDGE_OF_STEP = ((0, 1, 0), (0, 0, 0), (1, 0, 1), (1, 0, 0))


@njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


_DX = np.array([1, -1, 0, 0], dtype=np.int64)
_DY = np.array([0, 0, 1, -1], dtype=np.int64)


@njit(cache=True)
def _walk_kernel(a, b, walls, s, periodic, W, H, max_steps):
    """Walk from raster cell ``(a, b)`` until it meets a wall bit.

    ``walls[a, b]`` has bit ``k`` set when the side of the cell in
    direction ``k`` (E, W, N, S) lies on the interface. Returns the last
    cell, the direction of the killing step and the number of steps
    (``-1`` when ``max_steps`` is exhausted).
    """
    s0, s1, s2, s3 = s[0], s[1], s[2], s[3]
    steps = 0
    k = 0
    dx = _DX
    dy = _DY
    while steps < max_steps:
        r = _rotl(s1 * np.uint64(5), 7) * np.uint64(9)
        t = s1 << np.uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        k = int(r >> np.uint64(62))
        steps += 1
        if (walls[a, b] >> k) & 1:
            break
        a += dx[k]
        b += dy[k]
        if periodic:
            if a == W:
                a = 0
            elif a < 0:
                a = W - 1
            if b == H:
                b = 0
            elif b < 0:
                b = H - 1
    else:
        steps = -1
    s[0], s[1], s[2], s[3] = s0, s1, s2, s3
    return a, b, k, steps


class ScriptedSteps:
    """Deterministic replacement for an :class:`Rng` in walks.

    Parameters
    ----------
    steps : iterable of int or str
        Directions as indices 0..3 or letters ``"E" "W" "N" "S"``.
    """

    _LETTERS = {"E": 0, "W": 1, "N": 2, "S": 3}

    def __init__(self, steps):
        self.steps = [self._LETTERS.get(s, s) if isinstance(s, str) else int(s) for s in steps]
        self.pos = 0

    def next_direction(self) -> int:
        if self.pos >= len(self.steps):
            raise ParameterError("scripted walk ran out of steps before crossing the interface")
        k = self.steps[self.pos]
        self.pos += 1
        return k


@dataclass
class ErosionEvent:
    """One firing of a source.

    ``outcome`` is ``"capture"`` (a cell changed owner), ``"reroute"`` (the
    walk hit a self-touching part of its own interface, which is pushed
    across the end cell), ``"noop-source"`` or ``"noop-annihilation"``.
    """

    time: float
    source: int
    walk_length: int
    outcome: str
    cell: tuple | None = None
    loser: int | None = None
    walk: list | None = None
    diffs: dict = field(default_factory=dict)
    replay: dict = field(default_factory=dict)


def _python_walk(state: ErosionState, d: int, start, draw):
    a, b = state.index(start)
    walls = state.walls[d]
    W, H, per = state.W, state.H, state.periodic
    cells = [state.cell(a, b)]
    steps = 0
    while True:
        k = draw()
        steps += 1
        if (int(walls[a, b]) >> k) & 1:
            break
        a += DIRECTIONS[k][0]
        b += DIRECTIONS[k][1]
        if per:
            a %= W
            b %= H
        cells.append(state.cell(a, b))
        if steps >= MAX_WALK_STEPS:
            raise WalkOverflowError("walk exceeded the step cap")
    return (a, b), k, steps, cells


def walk_until_crossing(state: ErosionState, d: int, start, rng, record=False):
    """Run a walk of droplet ``d`` from ``start`` until it crosses its interface.

    Returns ``(u, k, steps, cells)``: the last cell inside (as a lattice
    cell), the direction of the crossing step, the number of steps
    including the crossing one, and the visited cells when ``record`` is
    set (``None`` otherwise).
    """
    if isinstance(rng, ScriptedSteps):
        (a, b), k, steps, cells = _python_walk(state, d, start, rng.next_direction)
        return state.cell(a, b), k, steps, cells
    if record:
        (a, b), k, steps, cells = _python_walk(state, d, start, lambda: rng.next_u64() >> 62)
        return state.cell(a, b), k, steps, cells
    a, b = state.index(start)
    a, b, k, steps = _walk_kernel(a, b, state.walls[d], rng.state,
                                  state.periodic, state.W, state.H, MAX_WALK_STEPS)
    if steps < 0:
        raise WalkOverflowError("walk exceeded the step cap")
    return state.cell(int(a), int(b)), int(k), int(steps), None


def _crossed_key(state: ErosionState, u, k):
    o, dx, dy = _EDGE_OF_STEP[k]
    x, y = u[0] + dx, u[1] + dy
    if state.dims:
        x %= state.dims[0]
        y %= state.dims[1]
    return (o, x, y)


def single_event(state: ErosionState, source: int, rng, time: float | None = None,
                 record_walk: bool = False, check: str = "local"):
    """Fire source ``source`` once.

    The state is updated in place and returned together with the event.

    Parameters
    ----------
    rng : Rng or ScriptedSteps
        Step source of the walk; a :class:`Rng` is advanced by one draw
        per step.
    check : {"local", "full", "none"}
        Invariant checking after a capture: ``"full"`` runs
        :func:`check_invariants`, ``"local"`` only the cheap local tests.
    """
    src = state.sources[source]
    d = src.droplet
    replay = {"source": source, "start": list(src.cell),
              "rng_state": rng.getstate() if isinstance(rng, Rng) else None,
              "clock": state.clock}
    u, k, steps, cells = walk_until_crossing(state, d, src.cell, rng, record_walk)
    t = state.clock if time is None else time
    dx, dy = DIRECTIONS[k]
    v = state.surface.wrap_cell((u[0] + dx, u[1] + dy))
    if cells is not None:
        cells = cells + [v]
    ev = ErosionEvent(t, source, steps, "", cell=v, walk=cells, replay=replay)
    if v in state.source_cells:
        ev.outcome = "noop-source"
        return state, ev
    loser = state.owner_of(v)
    if loser not in (FREE, d) and state.cell_counts[loser] <= 1:
        ev.outcome = "noop-annihilation"
        ev.loser = loser
        return state, ev

    state.ensure_room(v)
    key = _crossed_key(state, u, k)
    if loser != d:
        state.owner[state.index(v)] = d
        state.cell_counts[d] += 1
        if loser != FREE:
            state.cell_counts[loser] -= 1
        ev.outcome = "capture"
        ev.loser = None if loser == FREE else loser
    else:
        ev.outcome = "reroute"
    for j in range(state.n):
        iface = state.interfaces[j]
        nodes = iface.traversals(key)
        if not nodes:
            continue
        before = iface.length
        seeds = []
        for m in nodes:
            seeds.extend(iface.reroute(m, dx, dy))
        try:
            iface.remove_slits(seeds)
        except EmptyInterfaceError as exc:
            replay["event"] = _event_dict(ev)
            raise InvariantViolation(f"interface {j} vanished: {exc}", replay) from exc
        ev.diffs[j] = (before, iface.length)
    if check == "full":
        replay["event"] = _event_dict(ev)
        check_invariants(state, replay)
    elif check == "local":
        _local_check(state, v, ev, replay)
    return state, ev


def _event_dict(ev: ErosionEvent) -> dict:
    return {"time": ev.time, "source": ev.source, "walk_length": ev.walk_length,
            "outcome": ev.outcome, "cell": list(ev.cell) if ev.cell else None,
            "walk": [list(c) for c in ev.walk] if ev.walk else None}


def _local_check(state: ErosionState, v, ev: ErosionEvent, replay: dict):
    """Cheap per-event tests: source ownership and the edges around ``v``."""
    for s in state.sources:
        if state.owner_of(s.cell) != s.droplet:
            replay["event"] = _event_dict(ev)
            raise InvariantViolation(f"source {s.cell} lost by droplet {s.droplet}", replay)
    own = state.owner_of(v)
    for k, (dx, dy) in enumerate(DIRECTIONS):
        w = state.surface.wrap_cell((v[0] + dx, v[1] + dy))
        other = state.owner_of(w)
        key = _crossed_key(state, v, k)
        for j in range(state.n):
            n = len(state.interfaces[j].edges.get(key, ()))
            # An edge between a cell of droplet j and a cell outside j is
            # traversed an odd number of times by j's interface, any other
            # edge an even number of times.
            if ((own == j) != (other == j)) != (n % 2 == 1):
                replay["event"] = _event_dict(ev)
                raise InvariantViolation(
                    f"edge {key} is traversed {n} times by droplet {j}", replay)


# -- schedules -----------------------------------------------------------------

class PoissonClocks:
    """Independent exponential clocks, one per source.

    Rates are multiplied by the time scale ``N**2`` so that times are
    macroscopic. All clock draws come from the single ``rng``.
    """

    def __init__(self, rng: Rng):
        self.rng = rng
        self._heap = None

    def _init(self, state: ErosionState):
        scale = float(state.time_scale)
        self._heap = []
        for j, s in enumerate(state.sources):
            t = state.clock + self.rng.exponential(s.rate * scale)
            self._heap.append((t, j))
        heapq.heapify(self._heap)

    def peek(self, state: ErosionState):
        if self._heap is None:
            self._init(state)
        return self._heap[0]

    def pop(self, state: ErosionState):
        t, j = self.peek(state)
        scale = float(state.time_scale)
        heapq.heapreplace(self._heap, (t + self.rng.exponential(state.sources[j].rate * scale), j))
        return t, j


class RoundRobin:
    """Deterministic schedule: source ``j`` fires at ``k / (a_j N**2)``, k = 1, 2, ...

    Times are exact fractions so that coincident firings are resolved by
    source index.
    """

    def __init__(self):
        self._heap = None

    def _init(self, state: ErosionState):
        scale = state.time_scale
        clock = Fraction(state.clock)
        self._heap = []
        self._period = []
        for j, s in enumerate(state.sources):
            period = 1 / (Fraction(s.rate) * scale)
            k = math.floor(clock / period) + 1
            self._period.append(period)
            self._heap.append((k * period, j, k))
        heapq.heapify(self._heap)

    def peek(self, state: ErosionState):
        if self._heap is None:
            self._init(state)
        t, j, _ = self._heap[0]
        return t, j

    def pop(self, state: ErosionState):
        self.peek(state)
        t, j, k = self._heap[0]
        heapq.heapreplace(self._heap, ((k + 1) * self._period[j], j, k + 1))
        return t, j


def next_event_time(state: ErosionState, mode) -> tuple:
    """Consume and return the next ``(time, source index)`` of a schedule."""
    t, j = mode.pop(state)
    return float(t), j


def make_schedule(mode, seed: int):
    if mode in ("poisson", None):
        return PoissonClocks(Rng(seed, 0))
    if mode in ("round-robin", "roundrobin"):
        return RoundRobin()
    if isinstance(mode, (PoissonClocks, RoundRobin)):
        return mode
    raise ParameterError(f"unknown schedule {mode!r}")


# -- runs ------------------------------------------------------------------------

@dataclass
class RunResult:
    state: ErosionState
    snapshots: list
    summary: dict
    log: list


class Simulation:
    """A running erosion process that can be advanced in stages.

    Walk randomness for source ``j`` comes from stream ``1 + j`` of the
    seed; the Poisson clocks use stream 0.
    """

    def __init__(self, state: ErosionState, mode="poisson", seed: int = 0,
                 check_every: int = 1000, keep_log: bool = True):
        self.state = state
        self.seed = int(seed)
        self.schedule = make_schedule(mode, self.seed)
        self.rngs = [Rng(self.seed, 1 + j) for j in range(len(state.sources))]
        self.check_every = int(check_every)
        self.keep_log = keep_log
        self.log: list = []
        self.stats = {"events": 0, "capture": 0, "reroute": 0, "noop-source": 0,
                      "noop-annihilation": 0, "invariant_checks": 0,
                      "max_touching_vertices": 0, "walk_steps": 0}

    def _check(self):
        info = check_invariants(self.state, {"clock": self.state.clock,
                                             "events": self.state.events, "seed": self.seed})
        self.stats["invariant_checks"] += 1
        self.stats["max_touching_vertices"] = max(self.stats["max_touching_vertices"],
                                                  info["touching_vertices"])

    def advance(self, t_end: float, snapshot_times=()) -> list:
        """Apply all events with time at most ``t_end``.

        Returns snapshots (see :func:`hslab.erosion.io.to_snapshot`) taken
        at the requested times, each reflecting the state after the last
        event not later than that time.
        """
        from .io import to_snapshot

        st = self.state
        if t_end < st.clock:
            raise ParameterError("t_end precedes the current clock")
        pending = sorted(float(s) for s in snapshot_times)
        snaps = []
        while True:
            t, j = self.schedule.peek(st)
            while pending and pending[0] < t and pending[0] <= t_end:
                snaps.append(to_snapshot(st, pending.pop(0)))
            if t > t_end:
                break
            t, j = self.schedule.pop(st)
            st.clock = float(t)
            _, ev = single_event(st, j, self.rngs[j], time=float(t))
            st.events += 1
            self.stats["events"] += 1
            self.stats[ev.outcome] += 1
            self.stats["walk_steps"] += ev.walk_length
            if self.keep_log:
                self.log.append((float(t), j, ev.walk_length, ev.outcome,
                                 ev.cell[0], ev.cell[1]))
            if self.check_every and st.events % self.check_every == 0:
                self._check()
        while pending and pending[0] <= t_end:
            snaps.append(to_snapshot(st, pending.pop(0)))
        return snaps


def run(state: ErosionState, t_end: float, mode="poisson", seed: int = 0,
        snapshot_times=(), check_every: int = 1000, keep_log: bool = True) -> RunResult:
    """Run erosion from ``state`` (modified in place) up to macroscopic time ``t_end``.

    One unit of macroscopic time corresponds to ``rate * N**2`` firings of
    a source, with ``N = 1 / mesh``.
    """
    sim = Simulation(state, mode, seed, check_every, keep_log)
    snaps = sim.advance(t_end, snapshot_times)
    if check_every:
        sim._check()
    summary = dict(sim.stats)
    summary["cell_counts"] = list(state.cell_counts)
    summary["clock"] = state.clock
    return RunResult(state, snaps, summary, sim.log)
