"""Square lattices, square-tiled surfaces and a seedable walk engine.

Cells ``(i, j)`` are squares of the dual lattice with centers at
``origin + mesh * (i + 1/2, j + 1/2)``. Primal vertices ``(x, y)`` sit at
``origin + mesh * (x, y)``. On the torus both are wrapped into
``[0, width) x [0, height)``.

Random numbers come from xoshiro256** seeded through SplitMix64. The
generator is implemented with numba so that the erosion walk can run
entirely in compiled code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numba import njit

from .errors import AdjacencyError, ParameterError

# Neighbour order used everywhere: east, west, north, south.
DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))
EAST, WEST, NORTH, SOUTH = range(4)


@dataclass(frozen=True)
class Plane:
    """The square lattice on the whole plane."""

    mesh: float = 1.0
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.mesh > 0:
            raise ParameterError("mesh must be positive")

    periodic = False

    def wrap_cell(self, c):
        return (int(c[0]), int(c[1]))

    wrap_vertex = wrap_cell


@dataclass(frozen=True)
class Torus:
    """A flat torus tiled by ``width_cells x height_cells`` squares.

    ``origin`` is the lower-left corner of the fundamental domain in
    continuum coordinates.
    """

    width_cells: int
    height_cells: int
    mesh: float = 1.0
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.mesh > 0:
            raise ParameterError("mesh must be positive")
        if int(self.width_cells) < 4 or int(self.height_cells) < 4:
            raise ParameterError("torus dimensions must be at least 4 cells")

    periodic = True

    def wrap_cell(self, c):
        return (int(c[0]) % self.width_cells, int(c[1]) % self.height_cells)

    wrap_vertex = wrap_cell

    @property
    def width(self) -> float:
        return self.width_cells * self.mesh

    @property
    def height(self) -> float:
        return self.height_cells * self.mesh


TiledSurface = Union[Plane, Torus]


def surface_to_dict(surface: TiledSurface) -> dict:
    if isinstance(surface, Torus):
        return {"kind": "torus", "width_cells": surface.width_cells,
                "height_cells": surface.height_cells, "mesh": surface.mesh,
                "origin": list(surface.origin)}
    return {"kind": "plane", "mesh": surface.mesh, "origin": list(surface.origin)}


def surface_from_dict(d: dict) -> TiledSurface:
    kind = d.get("kind", "plane")
    origin = tuple(float(v) for v in d.get("origin", (0.0, 0.0)))
    if kind == "plane":
        return Plane(float(d["mesh"]), origin)
    if kind == "torus":
        return Torus(int(d["width_cells"]), int(d["height_cells"]), float(d["mesh"]), origin)
    raise ParameterError(f"unknown surface kind {kind!r}")


def neighbors(surface: TiledSurface, c) -> list:
    """The four dual neighbours of ``c`` in the order E, W, N, S."""
    i, j = c
    return [surface.wrap_cell((i + dx, j + dy)) for dx, dy in DIRECTIONS]


@dataclass(frozen=True)
class PrimalEdge:
    """A primal edge, stored by its lower-left endpoint.

    ``orientation == "v"``: the segment ``(x, y)-(x, y+1)``, separating
    cells ``(x-1, y)`` and ``(x, y)``. ``orientation == "h"``: the segment
    ``(x, y)-(x+1, y)``, separating cells ``(x, y-1)`` and ``(x, y)``.
    """

    orientation: str
    x: int
    y: int

    def vertices(self):
        if self.orientation == "v":
            return (self.x, self.y), (self.x, self.y + 1)
        return (self.x, self.y), (self.x + 1, self.y)


def step_direction(surface: TiledSurface, a, b) -> int:
    """Index into :data:`DIRECTIONS` of the step ``a -> b``."""
    a = surface.wrap_cell(a)
    b = surface.wrap_cell(b)
    for k, n in enumerate(neighbors(surface, a)):
        if n == b:
            return k
    raise AdjacencyError(f"cells {a} and {b} are not adjacent")


def edge_of_step(surface: TiledSurface, a, direction: int) -> PrimalEdge:
    """The primal edge crossed when stepping from cell ``a`` in ``direction``."""
    i, j = a
    if direction == EAST:
        x, y, o = i + 1, j, "v"
    elif direction == WEST:
        x, y, o = i, j, "v"
    elif direction == NORTH:
        x, y, o = i, j + 1, "h"
    else:
        x, y, o = i, j, "h"
    x, y = surface.wrap_vertex((x, y))
    return PrimalEdge(o, x, y)


def separating_edge(a, b, surface: TiledSurface | None = None) -> PrimalEdge:
    """The unique primal edge between adjacent cells ``a`` and ``b``."""
    surface = surface or Plane()
    return edge_of_step(surface, surface.wrap_cell(a), step_direction(surface, a, b))


def cell_center(surface: TiledSurface, c) -> complex:
    ox, oy = surface.origin
    return complex(ox + surface.mesh * (c[0] + 0.5), oy + surface.mesh * (c[1] + 0.5))


def vertex_position(surface: TiledSurface, v) -> complex:
    ox, oy = surface.origin
    return complex(ox + surface.mesh * v[0], oy + surface.mesh * v[1])


def cell_of_point(surface: TiledSurface, z: complex):
    """The cell containing ``z``.

    A point on a lattice line lies in several closed squares; the one with
    the lexicographically smallest center is returned.
    """
    ox, oy = surface.origin
    u = (complex(z).real - ox) / surface.mesh
    v = (complex(z).imag - oy) / surface.mesh
    i = math.ceil(u) - 1
    j = math.ceil(v) - 1
    return surface.wrap_cell((i, j))


# ---------------------------------------------------------------------------
# xoshiro256** with SplitMix64 seeding

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SM1 = np.uint64(0xBF58476D1CE4E5B9)
_SM2 = np.uint64(0x94D049BB133111EB)
_STREAM = np.uint64(0xD1B54A32D192ED03)
_MASK64 = (1 << 64) - 1


@njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def _next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def _fill_u64(s, out):
    for k in range(out.shape[0]):
        out[k] = _next_u64(s)


def _splitmix64(x: int):
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, z ^ (z >> 31)


class Rng:
    """xoshiro256** generator with explicit streams.

    The four state words are successive SplitMix64 outputs started from
    ``splitmix64(seed) + stream * 0xD1B54A32D192ED03`` (mod 2**64).
    Identical ``(seed, stream)`` pairs give identical sequences on every
    platform.
    """

    family = "xoshiro256**/splitmix64"

    def __init__(self, seed: int = 0, stream: int = 0, state=None):
        self.seed = int(seed)
        self.stream = int(stream)
        if state is not None:
            self.state = np.array(state, dtype=np.uint64)
            return
        _, x = _splitmix64(self.seed & _MASK64)
        x = (x + self.stream * 0xD1B54A32D192ED03) & _MASK64
        words = []
        for _ in range(4):
            x, z = _splitmix64(x)
            words.append(z)
        if not any(words):
            words[0] = 1
        self.state = np.array(words, dtype=np.uint64)

    @classmethod
    def from_state(cls, words) -> "Rng":
        return cls(state=words)

    def getstate(self) -> list:
        return [int(w) for w in self.state]

    def copy(self) -> "Rng":
        r = Rng(self.seed, self.stream, state=self.state.copy())
        return r

    def next_u64(self) -> int:
        return int(_next_u64(self.state))

    def random(self) -> float:
        """Uniform double in ``[0, 1)`` from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def exponential(self, rate: float = 1.0) -> float:
        return -math.log1p(-self.random()) / rate

    def integers(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.uint64)
        _fill_u64(self.state, out)
        return out


def walk_step(surface: TiledSurface, c, rng: Rng):
    """One uniform dual-lattice step; uses the top two bits of one draw."""
    k = rng.next_u64() >> 62
    dx, dy = DIRECTIONS[k]
    return surface.wrap_cell((c[0] + dx, c[1] + dy))
