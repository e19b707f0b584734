"""Erosion state: ownership raster, interfaces, sources and invariants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import (InvariantViolation, OverlapError, ParameterError,
                      SourceOutsideError)
from ..kernels import WeightedDivisor
from ..lattice import TiledSurface, Torus, cell_center, cell_of_point
from .interface import Interface, boundary_walk, winding_interior

FREE = -1

# Margin (in cells) kept between any droplet and the border of the plane raster.
_MARGIN = 3


@dataclass(frozen=True)
class Source:
    droplet: int
    cell: tuple
    rate: float


def _set_bit(arr, a, b, bit, on, n, axis=0):
    """Set or clear a wall bit, ignoring cells outside the raster."""
    if (a if axis == 0 else b) < 0 or (a if axis == 0 else b) >= n:
        return
    if on:
        arr[a, b] |= 1 << bit
    else:
        arr[a, b] &= ~(1 << bit) & 0xFF


class ErosionState:
    """Mutable configuration of interface erosion.

    Ownership is stored in an integer raster; on the plane the raster is a
    window ``[ox, ox + W) x [oy, oy + H)`` that grows on demand, so the
    lattice itself is unbounded. Each droplet also keeps, per primal edge,
    the number of traversals by its interface; the walk kernel reads these
    arrays to detect crossings.
    """

    def __init__(self, surface: TiledSurface, sources, n_droplets: int,
                 window=None):
        self.surface = surface
        self.sources = [Source(int(s.droplet), tuple(s.cell), float(s.rate)) for s in sources]
        self.n = int(n_droplets)
        self.clock = 0.0
        self.events = 0
        if isinstance(surface, Torus):
            self.W, self.H = surface.width_cells, surface.height_cells
            self.ox = self.oy = 0
            self.dims = (self.W, self.H)
        else:
            ox, oy, w, h = window
            self.ox, self.oy, self.W, self.H = int(ox), int(oy), int(w), int(h)
            self.dims = None
        self.owner = np.full((self.W, self.H), FREE, dtype=np.int32)
        self.vcnt = [self._zeros_v() for _ in range(self.n)]
        self.hcnt = [self._zeros_h() for _ in range(self.n)]
        self.walls = [np.zeros((self.W, self.H), dtype=np.uint8) for _ in range(self.n)]
        self.interfaces: list = [None] * self.n
        self.cell_counts = [0] * self.n
        self.source_cells = {self.surface.wrap_cell(s.cell) for s in self.sources}

    # -- raster helpers ------------------------------------------------------
    @property
    def periodic(self) -> bool:
        return self.dims is not None

    def _zeros_v(self):
        shape = (self.W, self.H) if self.dims else (self.W + 1, self.H)
        return np.zeros(shape, dtype=np.int32)

    def _zeros_h(self):
        shape = (self.W, self.H) if self.dims else (self.W, self.H + 1)
        return np.zeros(shape, dtype=np.int32)

    def index(self, c):
        """Raster index of cell ``c``."""
        if self.dims:
            return c[0] % self.W, c[1] % self.H
        return c[0] - self.ox, c[1] - self.oy

    def cell(self, a: int, b: int):
        """Cell at raster index ``(a, b)``."""
        return (a + self.ox, b + self.oy)

    def owner_of(self, c) -> int:
        a, b = self.index(c)
        if not self.dims and not (0 <= a < self.W and 0 <= b < self.H):
            return FREE
        return int(self.owner[a, b])

    def _edge_counter(self, d: int):
        vc, hc, walls = self.vcnt, self.hcnt, self.walls

        def on_edge(key, delta):
            o, x, y = key
            a, b = x - self.ox, y - self.oy
            if o == 0:
                c = vc[d][a, b] + delta
                vc[d][a, b] = c
                # Bit 0 (east side) of the cell to the left, bit 1 (west) of the cell itself.
                left = (a - 1) % self.W if self.dims else a - 1
                _set_bit(walls[d], left, b, 0, c > 0, self.W)
                _set_bit(walls[d], a, b, 1, c > 0, self.W)
            else:
                c = hc[d][a, b] + delta
                hc[d][a, b] = c
                below = (b - 1) % self.H if self.dims else b - 1
                _set_bit(walls[d], a, below, 2, c > 0, self.H, axis=1)
                _set_bit(walls[d], a, b, 3, c > 0, self.H, axis=1)
        return on_edge

    def set_interface(self, d: int, vertices):
        if self.interfaces[d] is not None:
            old = self.interfaces[d]
            old.on_edge = None
        self.vcnt[d][:] = 0
        self.hcnt[d][:] = 0
        self.walls[d][:] = 0
        self.interfaces[d] = Interface(vertices, self.dims, self._edge_counter(d))

    def ensure_room(self, c):
        """Grow the plane raster so that ``c`` is at least a margin inside."""
        if self.dims:
            return
        a, b = self.index(c)
        if _MARGIN <= a < self.W - _MARGIN and _MARGIN <= b < self.H - _MARGIN:
            return
        cx, cy = c
        x0 = min(self.ox, cx - 2 * _MARGIN)
        y0 = min(self.oy, cy - 2 * _MARGIN)
        x1 = max(self.ox + self.W, cx + 2 * _MARGIN + 1)
        y1 = max(self.oy + self.H, cy + 2 * _MARGIN + 1)
        w, h = x1 - x0, y1 - y0
        # Grow geometrically so that repeated growth stays cheap.
        pad_x = max(w // 2, 8)
        pad_y = max(h // 2, 8)
        nx0 = x0 - (pad_x if x0 < self.ox else 0)
        ny0 = y0 - (pad_y if y0 < self.oy else 0)
        nx1 = x1 + (pad_x if x1 > self.ox + self.W else 0)
        ny1 = y1 + (pad_y if y1 > self.oy + self.H else 0)
        self._resize(nx0, ny0, nx1 - nx0, ny1 - ny0)

    def _resize(self, nx0, ny0, nw, nh):
        dx, dy = self.ox - nx0, self.oy - ny0
        owner = np.full((nw, nh), FREE, dtype=np.int32)
        owner[dx:dx + self.W, dy:dy + self.H] = self.owner
        vcnt, hcnt, walls = [], [], []
        for d in range(self.n):
            wl = np.zeros((nw, nh), dtype=np.uint8)
            wl[dx:dx + self.W, dy:dy + self.H] = self.walls[d]
            walls.append(wl)
            v = np.zeros((nw + 1, nh), dtype=np.int32)
            v[dx:dx + self.W + 1, dy:dy + self.H] = self.vcnt[d]
            h = np.zeros((nw, nh + 1), dtype=np.int32)
            h[dx:dx + self.W, dy:dy + self.H + 1] = self.hcnt[d]
            vcnt.append(v)
            hcnt.append(h)
        self.owner = owner
        self.vcnt[:] = vcnt
        self.hcnt[:] = hcnt
        self.walls[:] = walls
        self.ox, self.oy, self.W, self.H = nx0, ny0, nw, nh

    # -- queries ---------------------------------------------------------------
    @property
    def mesh(self) -> float:
        return self.surface.mesh

    @property
    def time_scale(self) -> Fraction:
        """Number of events per unit rate per unit macroscopic time, ``N**2``."""
        m = Fraction(self.surface.mesh).limit_denominator(10**6)
        return 1 / (m * m)

    def cells_of(self, d: int) -> list:
        a, b = np.nonzero(self.owner == d)
        cells = sorted(zip((a + self.ox).tolist(), (b + self.oy).tolist()))
        return cells

    def interface_vertices(self, d: int) -> list:
        return self.interfaces[d].vertices()

    def rates(self, d: int) -> list:
        return [s.rate for s in self.sources if s.droplet == d]

    def copy(self) -> "ErosionState":
        new = ErosionState.__new__(ErosionState)
        new.__dict__.update(self.__dict__)
        new.owner = self.owner.copy()
        new.vcnt = [np.zeros_like(v) for v in self.vcnt]
        new.hcnt = [np.zeros_like(h) for h in self.hcnt]
        new.walls = [np.zeros_like(w) for w in self.walls]
        new.cell_counts = list(self.cell_counts)
        new.sources = list(self.sources)
        new.source_cells = set(self.source_cells)
        new.interfaces = [None] * self.n
        for d in range(self.n):
            new.interfaces[d] = self.interfaces[d].copy(new._edge_counter(d))
        return new

    def fingerprint(self) -> tuple:
        """Hashable summary used to compare states bit for bit.

        Independent of the raster window, which depends on the history.
        """
        return (self.clock, tuple(tuple(self.cells_of(d)) for d in range(self.n)),
                tuple(tuple(i.vertices()) for i in self.interfaces),
                tuple(self.cell_counts))


def from_cells(surface: TiledSurface, droplets, sources) -> ErosionState:
    """Build a state from explicit cell sets.

    Parameters
    ----------
    droplets : list of iterables of cells
    sources : list of :class:`Source`
    """
    sets = [{surface.wrap_cell(c) for c in cs} for cs in droplets]
    for a in range(len(sets)):
        for b in range(a + 1, len(sets)):
            if sets[a] & sets[b]:
                raise OverlapError(f"droplets {a} and {b} overlap")
    for s in sources:
        if surface.wrap_cell(s.cell) not in sets[s.droplet]:
            raise SourceOutsideError(f"source cell {s.cell} is outside droplet {s.droplet}")
    window = None
    if not isinstance(surface, Torus):
        allc = [c for cs in sets for c in cs] + [tuple(s.cell) for s in sources]
        xs = [c[0] for c in allc]
        ys = [c[1] for c in allc]
        pad = 4 * _MARGIN
        window = (min(xs) - pad, min(ys) - pad, max(xs) - min(xs) + 1 + 2 * pad,
                  max(ys) - min(ys) + 1 + 2 * pad)
    st = ErosionState(surface, sources, len(sets), window)
    for d, cs in enumerate(sets):
        if not cs:
            raise ParameterError(f"droplet {d} is empty")
        for c in cs:
            st.owner[st.index(c)] = d
        st.cell_counts[d] = len(cs)
        st.set_interface(d, boundary_walk(cs, st.dims))
    check_invariants(st)
    return st


def _torus_delta(surface: Torus, z: complex, c: complex) -> complex:
    w, h = surface.width, surface.height
    dz = z - c
    return complex(dz.real - w * round(dz.real / w), dz.imag - h * round(dz.imag / h))


def init_circles(surface: TiledSurface, specs) -> ErosionState:
    """Droplets given by discretised discs around their sources.

    Parameters
    ----------
    specs : list of (center, radius, divisor)
        ``divisor`` is a :class:`WeightedDivisor` (or a list of
        ``(point, weight)`` pairs); each finite point becomes a source cell
        with the weight as its rate. A droplet consists of the cells whose
        centers lie within ``radius`` of ``center`` (distance measured on
        the torus where applicable).

    Raises
    ------
    OverlapError
        If two discretised discs share a cell.
    SourceOutsideError
        If a source cell is not inside its droplet.
    """
    droplets, sources = [], []
    for d, (center, radius, divisor) in enumerate(specs):
        center = complex(center)
        radius = float(radius)
        if not isinstance(divisor, WeightedDivisor):
            divisor = WeightedDivisor(tuple(divisor))
        atoms = divisor.finite_atoms
        m = surface.mesh
        ox, oy = surface.origin
        r_cells = int(math.ceil(radius / m)) + 2
        ci = int(math.floor((center.real - ox) / m))
        cj = int(math.floor((center.imag - oy) / m))
        cells = set()
        for i in range(ci - r_cells, ci + r_cells + 1):
            for j in range(cj - r_cells, cj + r_cells + 1):
                z = cell_center(surface, (i, j))
                dz = _torus_delta(surface, z, center) if isinstance(surface, Torus) else z - center
                if abs(dz) <= radius:
                    cells.add(surface.wrap_cell((i, j)))
        droplets.append(cells)
        for p, a in atoms:
            sources.append(Source(d, cell_of_point(surface, p), float(a)))
    return from_cells(surface, droplets, sources)


# -- invariants ---------------------------------------------------------------

_STRAIGHT_H = 1
_STRAIGHT_V = 2


def _walls_from_counts(state: ErosionState, vc, hc) -> np.ndarray:
    W, H = state.W, state.H
    if state.dims:
        east = np.roll(vc, -1, axis=0)
        north = np.roll(hc, -1, axis=1)
        west, south = vc, hc
    else:
        east, west = vc[1:, :], vc[:-1, :]
        north, south = hc[:, 1:], hc[:, :-1]
    walls = ((east > 0).astype(np.uint8) | ((west > 0).astype(np.uint8) << 1)
             | ((north > 0).astype(np.uint8) << 2) | ((south > 0).astype(np.uint8) << 3))
    return walls.reshape(W, H)


def check_invariants(state: ErosionState, replay=None) -> dict:
    """Verify I1-I5 and the ownership/interface duality.

    Returns statistics (number of self-touching vertices); raises
    :class:`InvariantViolation` with ``replay`` attached on failure.
    """
    replay = replay or {}

    def fail(msg):
        raise InvariantViolation(msg, replay)

    dims = state.dims
    straight = {}
    touches = 0
    for d in range(state.n):
        iface = state.interfaces[d]
        v = iface.array()
        if len(v) < 4:
            fail(f"interface {d} has fewer than four vertices")
        nv = np.roll(v, -1, axis=0)
        step = nv - v
        if not np.all(np.abs(step).sum(axis=1) == 1):
            fail(f"interface {d} has a non-unit step")
        # Ownership/interface duality through winding numbers in the cover.
        i0, j0, wind = winding_interior(v)
        if wind.size and (wind.min() < 0 or wind.max() > 1):
            fail(f"interface {d} has winding numbers outside {{0, 1}}")
        a, b = np.nonzero(wind == 1)
        ci, cj = a + i0, b + j0
        if dims:
            ci %= dims[0]
            cj %= dims[1]
        inside = set(zip(ci.tolist(), cj.tolist()))
        if len(inside) != len(ci):
            fail(f"interior of interface {d} overlaps itself on the torus")
        owned = set(state.cells_of(d)) if not dims else {
            (int(x), int(y)) for x, y in zip(*np.nonzero(state.owner == d))}
        if inside != owned:
            fail(f"droplet {d}: interior of the interface differs from the owned cells "
                 f"({len(inside ^ owned)} cells)")
        if state.cell_counts[d] != len(owned):
            fail(f"droplet {d}: stale cell count")
        # Edge counters agree with the walk.
        vc = np.zeros_like(state.vcnt[d])
        hc = np.zeros_like(state.hcnt[d])
        for k in iface.edges:
            o, x, y = k
            (vc if o == 0 else hc)[x - state.ox, y - state.oy] += len(iface.edges[k])
        if not (np.array_equal(vc, state.vcnt[d]) and np.array_equal(hc, state.hcnt[d])):
            fail(f"droplet {d}: edge counters out of sync")
        if not np.array_equal(_walls_from_counts(state, vc, hc), state.walls[d]):
            fail(f"droplet {d}: wall raster out of sync")
        # Transversal crossings: one visit runs straight east-west and
        # another straight north-south through the same vertex. Visits
        # sharing edges are zero-width corridors and never transversal.
        pv = v % np.array(dims) if dims else v
        prev_step = np.roll(step, 1, axis=0)
        for (x, y), (sx, sy), (px, py) in zip(pv.tolist(), step.tolist(), prev_step.tolist()):
            kind = 0
            if (sx, sy) == (px, py):
                kind = _STRAIGHT_H if sx else _STRAIGHT_V
            prev = straight.get((x, y))
            if prev is None:
                straight[(x, y)] = kind
            else:
                touches += 1
                if prev | kind == _STRAIGHT_H | _STRAIGHT_V:
                    fail(f"interfaces cross at vertex {(x, y)}")
                straight[(x, y)] = prev | kind
    for s in state.sources:
        if state.owner_of(s.cell) != s.droplet:
            fail(f"source cell {s.cell} is not owned by droplet {s.droplet}")
    return {"touching_vertices": touches}
