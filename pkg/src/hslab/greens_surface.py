"""Green's surfaces: half-strips and rectangles glued along vertical sides.

Every surface has one unpaired vertical side at ``x = 0`` of length
``pi * weight`` and lies in ``Re z <= 0``. An :class:`Assembly` is a rectangle
``[-b, 0] x [0, pi a]`` whose left side carries its children glued bottom to
top in list order; a child point with coordinate ``x_child`` has
``x_T = x_child - b``. The Green's function is ``-2 x_T``.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Union

from .config import STRIP_RENDER_DEPTH
from .errors import AddressError, ParameterError

LOCAL_TOL = 1e-12


@dataclass(frozen=True)
class HalfStrip:
    weight: float

    def __post_init__(self):
        if not (isinstance(self.weight, (int, float)) and self.weight > 0 and math.isfinite(self.weight)):
            raise ParameterError(f"strip weight must be positive, got {self.weight!r}")
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def height(self) -> float:
        return math.pi * self.weight

    @property
    def boundary_length(self) -> float:
        return self.height


@dataclass(frozen=True)
class Assembly:
    rect_width: float
    children: tuple

    def __post_init__(self):
        if not (self.rect_width > 0 and math.isfinite(self.rect_width)):
            raise ParameterError("rectangle width must be positive")
        if len(self.children) == 0:
            raise ParameterError("an assembly needs at least one child")
        for c in self.children:
            if not isinstance(c, (HalfStrip, Assembly)):
                raise ParameterError(f"not a Green's surface: {c!r}")
        object.__setattr__(self, "rect_width", float(self.rect_width))
        object.__setattr__(self, "children", tuple(self.children))

    @property
    def weight(self) -> float:
        return sum(c.weight for c in self.children)

    @property
    def height(self) -> float:
        return math.pi * self.weight

    @property
    def boundary_length(self) -> float:
        return self.height

    def child_offsets(self) -> list:
        """Vertical position of each child's boundary side on the left edge."""
        out, acc = [], 0.0
        for c in self.children:
            out.append(acc)
            acc += c.height
        return out


GreensSurface = Union[HalfStrip, Assembly]


def strip(a: float) -> HalfStrip:
    return HalfStrip(a)


def assemble(rect_width: float, children) -> Assembly:
    return Assembly(rect_width, tuple(children))


@dataclass(frozen=True)
class SurfacePoint:
    """A point addressed by a child-index path and a local coordinate.

    An empty path addresses the top-level polygon itself (the strip, or the
    rectangle of an assembly).
    """

    path: tuple
    local: complex

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(int(i) for i in self.path))
        object.__setattr__(self, "local", complex(self.local))


def _locate(T: GreensSurface, p: SurfacePoint):
    """Walk the path; return the addressed piece and the accumulated x and y shifts."""
    node, dx, dy = T, 0.0, 0.0
    for depth, i in enumerate(p.path):
        if not isinstance(node, Assembly):
            raise AddressError(f"path {p.path} descends into a strip at depth {depth}")
        if not 0 <= i < len(node.children):
            raise AddressError(f"child index {i} out of range at depth {depth}")
        dx -= node.rect_width
        dy += node.child_offsets()[i]
        node = node.children[i]
    z = p.local
    h = node.height
    if not (-LOCAL_TOL <= z.imag <= h + LOCAL_TOL):
        raise AddressError(f"local y={z.imag} outside [0, {h}]")
    if z.real > LOCAL_TOL:
        raise AddressError(f"local x={z.real} is to the right of the boundary side")
    if isinstance(node, Assembly) and z.real < -node.rect_width - LOCAL_TOL:
        raise AddressError(f"local x={z.real} is left of the rectangle")
    return node, dx, dy


def x_coordinate(T: GreensSurface, p: SurfacePoint) -> float:
    """The canonical coordinate ``x_T``; zero on the unpaired side."""
    _, dx, _ = _locate(T, p)
    return p.local.real + dx


def greens_value(T: GreensSurface, p: SurfacePoint) -> float:
    return -2.0 * x_coordinate(T, p)


def layout_position(T: GreensSurface, p: SurfacePoint) -> complex:
    """Position of ``p`` in the planar layout used for rendering."""
    _, dx, dy = _locate(T, p)
    return p.local + complex(dx, dy)


def layout(T: GreensSurface, depth: float = STRIP_RENDER_DEPTH) -> list:
    """Polygons of the planar layout as ``(path, vertices)``; strips cut at ``depth``."""
    out = []

    def rec(node, path, dx, dy):
        h = node.height
        if isinstance(node, HalfStrip):
            left = min(depth, dx - 1.0)
            verts = [complex(dx, dy), complex(dx, dy + h), complex(left, dy + h), complex(left, dy)]
            out.append((path, verts))
            return
        b = node.rect_width
        verts = [complex(dx, dy), complex(dx, dy + h), complex(dx - b, dy + h), complex(dx - b, dy)]
        out.append((path, verts))
        for i, (c, off) in enumerate(zip(node.children, node.child_offsets())):
            rec(c, path + (i,), dx - b, dy + off)

    rec(T, (), 0.0, 0.0)
    return out


# ------------------------------------------------------------ tree round trip
def from_weighted_tree(tree) -> GreensSurface:
    """Build a surface from nested data.

    A leaf is a positive number (the weight) or ``{"strip": a}``; an internal
    node is ``(width, [children])`` or ``{"width": b, "children": [...]}``.
    """
    if isinstance(tree, (HalfStrip, Assembly)):
        return tree
    if isinstance(tree, bool):
        raise ParameterError("booleans are not weights")
    if isinstance(tree, (int, float)):
        return strip(tree)
    if isinstance(tree, dict):
        if "strip" in tree:
            return strip(tree["strip"])
        if "width" in tree and "children" in tree:
            return assemble(tree["width"], [from_weighted_tree(c) for c in tree["children"]])
        raise ParameterError(f"unrecognised tree node {tree!r}")
    if isinstance(tree, (tuple, list)) and len(tree) == 2 and isinstance(tree[1], (tuple, list)):
        return assemble(tree[0], [from_weighted_tree(c) for c in tree[1]])
    raise ParameterError(f"unrecognised tree node {tree!r}")


def to_weighted_tree(T: GreensSurface):
    """Inverse of :func:`from_weighted_tree` in the tuple form."""
    if isinstance(T, HalfStrip):
        return T.weight
    return (T.rect_width, [to_weighted_tree(c) for c in T.children])


def to_json_tree(T: GreensSurface) -> dict:
    if isinstance(T, HalfStrip):
        return {"strip": T.weight}
    return {"width": T.rect_width, "children": [to_json_tree(c) for c in T.children]}


def leaf_weights(T: GreensSurface) -> list:
    if isinstance(T, HalfStrip):
        return [T.weight]
    return [w for c in T.children for w in leaf_weights(c)]


# ------------------------------------------------------- surfaces of Green's type
@dataclass(frozen=True)
class Pairing:
    """Identify ``[s, t]`` on piece ``i`` with ``[s', t']`` on piece ``j``.

    Intervals are heights along the unpaired side ``x = 0``. The gluing map is
    ``z -> -z + offset`` (``kind="minus"``) or ``z -> z + offset``
    (``kind="plus"``).
    """

    i: int
    interval_i: tuple
    j: int
    interval_j: tuple
    offset: complex
    kind: str = "minus"

    def __post_init__(self):
        object.__setattr__(self, "interval_i", tuple(float(x) for x in self.interval_i))
        object.__setattr__(self, "interval_j", tuple(float(x) for x in self.interval_j))
        object.__setattr__(self, "offset", complex(self.offset))
        if self.kind not in ("minus", "plus"):
            raise ParameterError(f"unknown pairing kind {self.kind!r}")

    def apply(self, y: float) -> float:
        """Height on piece ``j`` of the point ``i y`` on piece ``i``."""
        z = complex(0, y)
        w = -z + self.offset if self.kind == "minus" else z + self.offset
        return w.imag

    def reversed(self) -> "Pairing":
        off = self.offset if self.kind == "minus" else -self.offset
        return Pairing(self.j, self.interval_j, self.i, self.interval_i, off, self.kind)


@dataclass(frozen=True)
class Issue:
    kind: str
    detail: str


@dataclass
class ValidationReport:
    issues: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.issues

    def kinds(self) -> set:
        return {x.kind for x in self.issues}

    def add(self, kind: str, detail: str):
        self.issues.append(Issue(kind, detail))


@dataclass(frozen=True)
class GreensTypeSurface:
    pieces: tuple
    pairings: tuple

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(from_weighted_tree(p) for p in self.pieces))
        object.__setattr__(self, "pairings", tuple(self.pairings))

    def to_json(self) -> str:
        doc = {
            "pieces": [to_json_tree(p) for p in self.pieces],
            "pairings": [
                {
                    "i": q.i,
                    "interval_i": list(q.interval_i),
                    "j": q.j,
                    "interval_j": list(q.interval_j),
                    "offset": [q.offset.real, q.offset.imag],
                    "kind": q.kind,
                }
                for q in self.pairings
            ],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text) -> "GreensTypeSurface":
        doc = json.loads(text) if isinstance(text, str) else text
        pairings = []
        for q in doc.get("pairings", []):
            off = q["offset"]
            off = complex(off[0], off[1]) if isinstance(off, (list, tuple)) else complex(off)
            pairings.append(
                Pairing(q["i"], tuple(q["interval_i"]), q["j"], tuple(q["interval_j"]), off, q.get("kind", "minus"))
            )
        return cls(tuple(from_weighted_tree(p) for p in doc["pieces"]), tuple(pairings))


def _canonical(q: Pairing):
    a = (q.i, q.interval_i)
    b = (q.j, q.interval_j)
    return (a, b) if a <= b else (b, a)


def validate_greens_type(S: GreensTypeSurface, tol: float = 1e-12) -> ValidationReport:
    """Check that the pairings glue the boundary sides into a closed surface."""
    rep = ValidationReport()
    n = len(S.pieces)
    seen = {}
    unique = []
    for k, q in enumerate(S.pairings):
        if not (0 <= q.i < n and 0 <= q.j < n):
            rep.add("OutOfRange", f"pairing {k} names a missing piece")
            continue
        key = _canonical(q)
        if key in seen:
            # listed in both directions: the reverse must be the same involution
            other = seen[key]
            same = q if (q.i, q.interval_i) == (other.i, other.interval_i) else q.reversed()
            if same.kind != other.kind or abs(same.offset - other.offset) > tol:
                rep.add("NonInvolutive", f"pairing {k} disagrees with its reverse")
            continue
        seen[key] = q
        unique.append((k, q))

    cover = {i: [] for i in range(n)}
    for k, q in unique:
        s, t = q.interval_i
        s2, t2 = q.interval_j
        if not (s < t and s2 < t2):
            rep.add("OutOfRange", f"pairing {k} has an empty or reversed interval")
            continue
        for piece, (a, b) in ((q.i, (s, t)), (q.j, (s2, t2))):
            h = S.pieces[piece].height
            if a < -tol or b > h + tol:
                rep.add("OutOfRange", f"pairing {k}: [{a}, {b}] not within the side of piece {piece}")
        if abs((t - s) - (t2 - s2)) > tol:
            rep.add("LengthMismatch", f"pairing {k}: lengths {t - s} and {t2 - s2}")
        if abs(q.offset.real) > tol:
            rep.add("OffsetMismatch", f"pairing {k}: offset moves the side off x = 0")
        if q.kind == "plus":
            rep.add("Orientation", f"pairing {k}: a translation keeps both pieces on the same side")
        else:
            lo, hi = sorted((q.apply(s), q.apply(t)))
            if abs(lo - s2) > tol or abs(hi - t2) > tol:
                rep.add("OffsetMismatch", f"pairing {k}: image [{lo}, {hi}] is not [{s2}, {t2}]")
        cover[q.i].append((s, t))
        cover[q.j].append((s2, t2))

    for i in range(n):
        h = S.pieces[i].height
        iv = sorted(cover[i])
        pos = 0.0
        for a, b in iv:
            if a > pos + tol:
                rep.add("CoverageGap", f"piece {i}: [{pos}, {a}] unpaired")
            elif a < pos - tol:
                rep.add("CoverageOverlap", f"piece {i}: overlap near {a}")
            pos = max(pos, b)
        if pos < h - tol:
            rep.add("CoverageGap", f"piece {i}: [{pos}, {h}] unpaired")
    return rep


# ---------------------------------------------------------- worked example
def slit_plane_surface() -> GreensTypeSurface:
    """One strip of weight 1 folded by ``z -> -z + pi i``; the plane minus ``[1, inf)``."""
    q = Pairing(0, (0.0, math.pi / 2), 0, (math.pi / 2, math.pi), complex(0, math.pi))
    return GreensTypeSurface((strip(1.0),), (q,))


def slit_plane_chart(z: complex) -> complex:
    """Map from the strip of :func:`slit_plane_surface` to the plane.

    ``zeta = exp(2 z)`` takes the strip to the unit disc and
    ``w = -4 zeta / (1 - zeta)**2`` takes the disc onto the plane slit along
    ``[1, inf)`` with the source at 0.
    """
    zeta = cmath.exp(2 * complex(z))
    return -4 * zeta / (1 - zeta) ** 2
