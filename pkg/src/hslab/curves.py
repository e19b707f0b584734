"""Ordered polylines in the complex plane and the geometry used on them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .config import fmt
from .errors import EmptyCurveError

# termination tags used by the tracers
OPEN = "open"
CLOSED = "closed"
CRITICAL = "critical"
ARCLEN = "arclen"
ESCAPE = "escape"
BOUNDARY = "boundary"


@dataclass(frozen=True, eq=False)
class PathCurve:
    """Polyline of complex points.

    For closed curves the closing segment from the last point back to the
    first is implied and the first point is not repeated in storage.
    ``status`` records why a tracer stopped; ``meta`` holds tracer-specific
    diagnostics (end vertex, closure gap, ...).
    """

    points: np.ndarray
    closed: bool = False
    status: str = OPEN
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if len(pts) > 1:
            keep = np.concatenate(([True], pts[1:] != pts[:-1]))
            pts = pts[keep]
        if self.closed and len(pts) > 1 and pts[0] == pts[-1]:
            pts = pts[:-1]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def vertices(self) -> np.ndarray:
        """Points with the first point repeated at the end for closed curves."""
        if self.closed and len(self.points) > 0:
            return np.append(self.points, self.points[0])
        return self.points

    @property
    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.vertices
        return v[:-1], v[1:]

    @property
    def length(self) -> float:
        v = self.vertices
        return float(np.sum(np.abs(np.diff(v))))

    def signed_area(self) -> float:
        """Shoelace area of the closed polygon (positive when counterclockwise)."""
        v = self.vertices
        if not self.closed:
            v = np.append(v, v[0])
        return 0.5 * float(np.sum((v[:-1].conjugate() * v[1:]).imag))

    def winding_number(self, p: complex) -> int:
        v = self.vertices
        if not self.closed:
            v = np.append(v, v[0])
        ang = np.angle((v[1:] - p) / (v[:-1] - p))
        return int(round(float(np.sum(ang)) / (2 * math.pi)))

    def reversed(self) -> "PathCurve":
        pts = self.points[::-1]
        if self.closed:
            pts = np.roll(pts, 1)
        return PathCurve(pts, self.closed, self.status, dict(self.meta))

    def conjugate(self) -> "PathCurve":
        return PathCurve(self.points.conjugate(), self.closed, self.status, dict(self.meta))

    def mapped(self, f) -> "PathCurve":
        return PathCurve(f(self.points), self.closed, self.status, dict(self.meta))

    def oriented(self, positive: bool = True) -> "PathCurve":
        if not self.closed:
            return self
        if (self.signed_area() > 0) == positive:
            return self
        return self.reversed()

    def resample(self, step: float) -> np.ndarray:
        """Points spaced at most ``step`` apart along the polyline (vertices kept)."""
        if len(self.points) == 0:
            raise EmptyCurveError("empty curve")
        v = self.vertices
        if len(v) == 1:
            return v.copy()
        a, b = v[:-1], v[1:]
        seg = np.abs(b - a)
        n = np.maximum(1, np.ceil(seg / step).astype(int))
        out = [a[k] + (b[k] - a[k]) * np.arange(n[k]) / n[k] for k in range(len(a))]
        out.append(v[-1:])
        return np.concatenate(out)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["index", "re", "im"])
        for k, z in enumerate(self.points):
            w.writerow([k, fmt(z.real), fmt(z.imag)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, closed: bool = False) -> "PathCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(np.array([complex(float(r["re"]), float(r["im"])) for r in rows]), closed)

    def to_shapely(self):
        import shapely.geometry as sg

        xy = np.column_stack([self.points.real, self.points.imag])
        if self.closed and len(xy) >= 3:
            return sg.LinearRing(xy)
        return sg.LineString(xy)


def is_simple(curve: PathCurve) -> bool:
    """True if the polyline has no self-intersections (touching counts)."""
    if len(curve) < 3:
        return True
    return bool(curve.to_shapely().is_simple)


def crossing_points(a: PathCurve, b: PathCurve, allowed=(), tol: float = 1e-9) -> list:
    """Intersection points of two polylines other than those near ``allowed`` points."""
    geom = a.to_shapely().intersection(b.to_shapely())
    if geom.is_empty:
        return []
    pts = []
    for g in getattr(geom, "geoms", [geom]):
        for x, y in np.asarray(g.coords) if hasattr(g, "coords") else []:
            z = complex(x, y)
            if all(abs(z - c) > tol for c in allowed):
                pts.append(z)
    return pts


def circle_curve(center: complex, radius: float, n: int = 2048) -> PathCurve:
    t = 2 * math.pi * np.arange(n) / n
    return PathCurve(center + radius * np.exp(1j * t), closed=True)


def _dense(curve: PathCurve, step: float) -> np.ndarray:
    pts = curve.resample(step)
    return np.column_stack([pts.real, pts.imag])


def hausdorff_points(pa: np.ndarray, pb: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two finite point clouds in R^2."""
    from scipy.spatial import cKDTree

    if len(pa) == 0 or len(pb) == 0:
        raise EmptyCurveError("empty point set")
    da, _ = cKDTree(pb).query(pa)
    db, _ = cKDTree(pa).query(pb)
    return float(max(da.max(), db.max()))


def _to_polyline(pa: np.ndarray, pb: np.ndarray, k: int = 8) -> np.ndarray:
    """Distance from each point of ``pa`` to the polyline through ``pb``.

    Only the sub-segments touching the ``k`` nearest vertices of ``pb`` are
    tested, which is exact once ``pb`` is dense compared to the distances.
    """
    from scipy.spatial import cKDTree

    if len(pb) == 1:
        return np.hypot(*(pa - pb[0]).T)
    k = min(k, len(pb))
    _, idx = cKDTree(pb).query(pa, k=k)
    idx = idx.reshape(len(pa), k)
    seg = np.concatenate([idx, idx - 1], axis=1).clip(0, len(pb) - 2)
    s0, s1 = pb[seg], pb[seg + 1]
    d = s1 - s0
    w = pa[:, None, :] - s0
    dd = np.einsum("ijk,ijk->ij", d, d)
    t = np.where(dd > 0, np.einsum("ijk,ijk->ij", w, d) / np.where(dd > 0, dd, 1), 0).clip(0, 1)
    r = w - t[..., None] * d
    return np.sqrt(np.einsum("ijk,ijk->ij", r, r).min(axis=1))


def hausdorff_curves(a: PathCurve, b: PathCurve, step: float | None = None, max_samples: int = 400_000) -> float:
    """Hausdorff distance between polylines.

    Each curve is densely resampled and the samples are measured against
    the other polyline segment by segment, so the only error is the
    sampling of the supremum (at most ``step / 2``). The default step is
    the shortest segment of either curve, capped at 1/4096 of the longer
    curve and enlarged if needed to stay below ``max_samples`` points.
    """
    if len(a) == 0 or len(b) == 0:
        raise EmptyCurveError("empty curve")
    if step is None:
        segs = [np.abs(np.diff(c.vertices)) for c in (a, b) if len(c) > 1]
        segs = np.concatenate(segs) if segs else np.array([])
        segs = segs[segs > 0]
        longest = max(a.length, b.length)
        step = float(segs.min()) if len(segs) else 1.0
        if longest > 0:
            step = max(min(step, longest / 4096), longest / max_samples)
    pa, pb = _dense(a, step), _dense(b, step)
    return float(max(_to_polyline(pa, pb).max(), _to_polyline(pb, pa).max()))
