"""Droplet interfaces as closed walks on the primal lattice.

An interface is a cyclic sequence of primal vertices in unwrapped (cover)
coordinates, positively oriented so that the droplet lies to the left.
It is stored as a doubly linked list together with an index from primal
edges to the nodes whose outgoing step traverses them, so that rerouting
and slit removal are local operations.
"""

from __future__ import annotations

import numpy as np

from ..errors import EmptyInterfaceError, InvariantViolation, ParameterError

# Vertex steps in counter-clockwise order: E, N, W, S.
VSTEPS = ((1, 0), (0, 1), (-1, 0), (0, -1))


def edge_key(x: int, y: int, dx: int, dy: int, dims=None):
    """Key ``(orientation, x, y)`` of the primal edge traversed by a step.

    Orientation 0 is a vertical edge ``(x, y)-(x, y+1)``, orientation 1 a
    horizontal edge ``(x, y)-(x+1, y)``; coordinates are wrapped when
    ``dims`` is given.
    """
    if dx == 1:
        o, ex, ey = 1, x, y
    elif dx == -1:
        o, ex, ey = 1, x - 1, y
    elif dy == 1:
        o, ex, ey = 0, x, y
    elif dy == -1:
        o, ex, ey = 0, x, y - 1
    else:
        raise ParameterError(f"not a unit step: ({dx}, {dy})")
    if dims is not None:
        ex %= dims[0]
        ey %= dims[1]
    return (o, ex, ey)


class Interface:
    """Mutable closed lattice walk with an edge index.

    Parameters
    ----------
    vertices : sequence of (int, int)
        The cyclic vertex sequence, first vertex not repeated at the end.
    dims : (int, int) or None
        Torus dimensions used to wrap edge keys; ``None`` on the plane.
    on_edge : callable, optional
        ``on_edge(key, delta)`` is called whenever a traversal of the edge
        ``key`` is added (+1) or removed (-1).
    """

    def __init__(self, vertices, dims=None, on_edge=None):
        self.dims = dims
        self.on_edge = on_edge
        self.x: list = []
        self.y: list = []
        self.nxt: list = []
        self.prv: list = []
        self.alive: list = []
        self._free: list = []
        self.edges: dict = {}
        verts = [(int(a), int(b)) for a, b in vertices]
        if len(verts) < 2:
            raise EmptyInterfaceError("an interface needs at least two vertices")
        ids = [self._new(a, b) for a, b in verts]
        n = len(ids)
        for k, m in enumerate(ids):
            self.nxt[m] = ids[(k + 1) % n]
            self.prv[m] = ids[k - 1]
        self.head = ids[0]
        self.length = n
        for m in ids:
            self._check_step(m)
            self._add(m)

    # -- node bookkeeping -------------------------------------------------
    def _new(self, a: int, b: int) -> int:
        if self._free:
            m = self._free.pop()
            self.x[m], self.y[m] = a, b
            self.alive[m] = True
            return m
        self.x.append(a)
        self.y.append(b)
        self.nxt.append(-1)
        self.prv.append(-1)
        self.alive.append(True)
        return len(self.x) - 1

    def _kill(self, m: int):
        self.alive[m] = False
        self._free.append(m)

    def _check_step(self, m: int):
        q = self.nxt[m]
        if abs(self.x[q] - self.x[m]) + abs(self.y[q] - self.y[m]) != 1:
            raise InvariantViolation(
                f"non-unit step {(self.x[m], self.y[m])} -> {(self.x[q], self.y[q])}", {})

    def key(self, m: int):
        q = self.nxt[m]
        return edge_key(self.x[m], self.y[m], self.x[q] - self.x[m], self.y[q] - self.y[m], self.dims)

    def _add(self, m: int):
        k = self.key(m)
        self.edges.setdefault(k, []).append(m)
        if self.on_edge is not None:
            self.on_edge(k, 1)

    def _remove(self, m: int):
        k = self.key(m)
        lst = self.edges[k]
        lst.remove(m)
        if not lst:
            del self.edges[k]
        if self.on_edge is not None:
            self.on_edge(k, -1)

    # -- queries ------------------------------------------------------------
    def vertices(self) -> list:
        out = []
        m = self.head
        for _ in range(self.length):
            out.append((self.x[m], self.y[m]))
            m = self.nxt[m]
        return out

    def array(self) -> np.ndarray:
        return np.array(self.vertices(), dtype=np.int64).reshape(-1, 2)

    def traversals(self, key) -> list:
        """Nodes whose outgoing step traverses the edge ``key``."""
        return list(self.edges.get(key, ()))

    def copy(self, on_edge=None) -> "Interface":
        return Interface(self.vertices(), self.dims, on_edge)

    # -- mutation -------------------------------------------------------------
    def reroute(self, m: int, sx: int, sy: int) -> list:
        """Replace the step ``a -> b`` leaving node ``m`` by ``a -> a+s -> b+s -> b``."""
        q = self.nxt[m]
        self._remove(m)
        m1 = self._new(self.x[m] + sx, self.y[m] + sy)
        m2 = self._new(self.x[q] + sx, self.y[q] + sy)
        self.nxt[m], self.prv[m1] = m1, m
        self.nxt[m1], self.prv[m2] = m2, m1
        self.nxt[m2], self.prv[q] = q, m2
        self.length += 2
        for k in (m, m1, m2):
            self._add(k)
        return [m, m1, m2, q]

    def remove_slits(self, seeds=None) -> int:
        """Delete back-and-forth steps ``p -> w -> p`` until none remain.

        Only nodes reachable from ``seeds`` (all nodes when ``None``) are
        examined; deletions push their neighbours back onto the work list.
        Returns the number of deleted steps.
        """
        work = list(self._all_nodes() if seeds is None else seeds)
        removed = 0
        while work:
            m = work.pop()
            if not self.alive[m]:
                continue
            p, q = self.prv[m], self.nxt[m]
            if self.x[p] != self.x[q] or self.y[p] != self.y[q]:
                continue
            if self.length <= 2:
                raise EmptyInterfaceError("slit removal consumed the whole interface")
            r = self.nxt[q]
            self._remove(p)
            self._remove(m)
            self._remove(q)
            self.nxt[p], self.prv[r] = r, p
            self._kill(m)
            self._kill(q)
            self.length -= 2
            if self.head in (m, q):
                self.head = p
            if self.length <= 2:
                raise EmptyInterfaceError("slit removal consumed the whole interface")
            self._add(p)
            removed += 2
            work.append(p)
            work.append(r)
        return removed

    def _all_nodes(self):
        m = self.head
        out = []
        for _ in range(self.length):
            out.append(m)
            m = self.nxt[m]
        return out


def remove_slits(walk) -> list:
    """Remove all back-and-forth spurs from a closed lattice walk.

    Parameters
    ----------
    walk : sequence of (int, int)
        Cyclic vertex list, first vertex not repeated.

    Returns
    -------
    list of (int, int)
        The reduced walk, starting from the first surviving original vertex.

    Raises
    ------
    EmptyInterfaceError
        If the whole walk is a tree traversed back and forth.
    """
    iface = Interface(walk)
    iface.remove_slits()
    return iface.vertices()


def winding_interior(vertices):
    """Winding numbers of all cells inside the bounding box of a walk.

    Returns ``(i0, j0, w)`` where ``w[a, b]`` is the winding number of the
    walk around the center of cell ``(i0 + a, j0 + b)``.
    """
    v = np.asarray(vertices, dtype=np.int64).reshape(-1, 2)
    nv = np.roll(v, -1, axis=0)
    x0, y0 = v.min(axis=0)
    x1, y1 = v.max(axis=0)
    w, h = int(x1 - x0), int(y1 - y0)
    if w == 0 or h == 0:
        return int(x0), int(y0), np.zeros((max(w, 0), max(h, 0)), dtype=np.int64)
    d = np.zeros((w + 1, h), dtype=np.int64)
    dy = nv[:, 1] - v[:, 1]
    up = dy == 1
    down = dy == -1
    np.add.at(d, (v[up, 0] - x0, v[up, 1] - y0), -1)
    np.add.at(d, (v[down, 0] - x0, nv[down, 1] - y0), 1)
    wind = np.cumsum(d, axis=0)[:w]
    return int(x0), int(y0), wind


def boundary_walk(cells, dims=None) -> list:
    """Positively oriented boundary walk of a finite cell set.

    Diagonal pinches are resolved by turning right, which joins cells that
    touch at a corner into one walk that touches itself at that vertex.

    Raises
    ------
    ParameterError
        If the boundary is not a single contractible closed walk (the set
        is disconnected, has holes, or wraps around the torus).
    """
    cells = {tuple(c) for c in cells}
    if not cells:
        raise ParameterError("empty cell set")

    def wrapv(p):
        return (p[0] % dims[0], p[1] % dims[1]) if dims else p

    def inside(i, j):
        return ((i % dims[0], j % dims[1]) if dims else (i, j)) in cells

    out = {}
    for i, j in cells:
        if not inside(i, j - 1):
            out.setdefault(wrapv((i, j)), []).append(0)
        if not inside(i + 1, j):
            out.setdefault(wrapv((i + 1, j)), []).append(1)
        if not inside(i, j + 1):
            out.setdefault(wrapv((i + 1, j + 1)), []).append(2)
        if not inside(i - 1, j):
            out.setdefault(wrapv((i, j + 1)), []).append(3)
    total = sum(len(v) for v in out.values())
    start = min(out)
    d0 = min(out[start])
    walk = [start]
    used = {(start, d0)}
    cur = (start[0] + VSTEPS[d0][0], start[1] + VSTEPS[d0][1])
    heading = d0
    while True:
        w = wrapv(cur)
        options = out[w]
        for turn in (3, 0, 1):
            d = (heading + turn) % 4
            if d in options:
                break
        else:
            raise ParameterError("boundary walk is broken")
        if (w, d) in used:
            break
        used.add((w, d))
        walk.append(cur)
        cur = (cur[0] + VSTEPS[d][0], cur[1] + VSTEPS[d][1])
        heading = d
    if cur != start or len(used) != total:
        raise ParameterError("cell set is not simply connected or wraps around the surface")
    return walk
