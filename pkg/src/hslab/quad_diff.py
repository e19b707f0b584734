"""Meromorphic quadratic differentials on the sphere and their vertical foliations.

A :class:`QuadDiff` stores ``phi(z) = factor * N(z) / prod_k (z - r_k)**2``
together with the poles it is meant to have and the source weight attached
to each double pole (``|Res sqrt(phi)| = a/2``).

Vertical trajectories are curves along which ``phi(z) dz**2 < 0``. With
``s = sqrt(phi)`` on a branch continued along the path, they are the level
sets of ``Re F`` where ``F' = s``, and they are integrated as flow lines of
the unit field ``v = i conj(s) / |s|``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .curves import ARCLEN, CLOSED, CRITICAL, ESCAPE, OPEN, PathCurve, crossing_points, hausdorff_curves
from .errors import BranchError, DegenerateError, ParameterError, SingularStartError, StepError
from .kernels import INF, WeightedDivisor, as_point

__all__ = [
    "QuadDiff",
    "CriticalGraph",
    "Edge",
    "PathCurve",
    "build_three_source",
    "finite_critical_points",
    "residue_sqrt",
    "separatrix_directions",
    "trace_vertical",
    "critical_graph",
    "level_drift",
]

RESIDUE_TOL = 1e-10
CLOSURE_ANGLE = 0.05
DIRECTION_TOL = 0.1
MIN_STEP = 1e-14

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_T = [0.5 * (x + 1.0) for x in _GL_X]
_GL_W = [0.5 * w for w in _GL_W]


def _trim(coeffs) -> list:
    c = [complex(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _horner(c: list, z: complex) -> complex:
    acc = 0j
    for a in reversed(c):
        acc = acc * z + a
    return acc


def _poly_from_roots(roots) -> list:
    """Ascending coefficients of ``prod (z - r)``."""
    p = [1 + 0j]
    for r in roots:
        q = [0j] * (len(p) + 1)
        for k, a in enumerate(p):
            q[k + 1] += a
            q[k] -= r * a
        p = q
    return p


def _poly_mul(a: list, b: list) -> list:
    out = [0j] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_add(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return [(a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(n)]


def _same(p, q) -> bool:
    if p is INF or q is INF:
        return p is q
    return p == q


@dataclass(frozen=True, eq=False)
class QuadDiff:
    """``factor * N(z) / prod (z - r)**2`` with declared double poles.

    Parameters
    ----------
    numerator : sequence of complex
        Coefficients of ``N`` in ascending order.
    denom_roots : sequence of complex
        Distinct finite points ``r_k``; each contributes ``(z - r_k)**2``.
        A root of ``N`` at some ``r_k`` lowers the pole order there.
    poles : sequence of (point, weight)
        The double poles with their intended weights, ``INF`` allowed.
        Checked against the leading Laurent coefficient on construction.
    factor : float
        Positive overall constant.
    """

    numerator: tuple
    denom_roots: tuple = ()
    poles: tuple = ()
    factor: float = 1.0
    _c: list = field(default=None, repr=False)

    def __post_init__(self):
        c = _trim(self.numerator)
        if all(x == 0 for x in c):
            raise DegenerateError("numerator is identically zero")
        roots = tuple(complex(r) for r in self.denom_roots)
        if len(set(roots)) != len(roots):
            raise ParameterError("denominator roots must be distinct")
        if not self.factor > 0:
            raise ParameterError("factor must be positive")
        poles = tuple((as_point(p), float(a)) for p, a in self.poles)
        object.__setattr__(self, "numerator", tuple(c))
        object.__setattr__(self, "denom_roots", roots)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "factor", float(self.factor))
        object.__setattr__(self, "_c", c)
        self._check_poles()

    # ------------------------------------------------------------------ data
    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def order_at_infinity(self) -> int:
        """Order of ``phi`` at infinity in the chart ``w = 1/z``."""
        return 2 * len(self.denom_roots) - self.degree - 4

    def leading_coefficient(self, p) -> complex:
        """Coefficient ``c`` with ``phi ~ c (z - p)**m`` (or ``c w**m`` at infinity)."""
        if p is INF:
            return self.factor * self._c[-1]
        p = complex(p)
        m = self._numerator_multiplicity(p)
        c = self._c
        for _ in range(m):
            c = _deflate(c, p)
        val = self.factor * _horner(c, p)
        for r in self.denom_roots:
            if r != p:
                val /= (p - r) ** 2
        return val

    def local_order(self, p) -> int:
        if p is INF:
            return self.order_at_infinity()
        p = complex(p)
        m = self._numerator_multiplicity(p)
        return m - (2 if p in self.denom_roots else 0)

    def _numerator_multiplicity(self, p: complex, tol: float = 0.0) -> int:
        c = self._c
        m = 0
        while len(c) > 1 and abs(_horner(c, p)) <= tol * max(1.0, max(abs(x) for x in c)):
            c = _deflate(c, p)
            m += 1
        return m

    def _check_poles(self):
        declared = {}
        for p, a in self.poles:
            if not a > 0:
                raise ParameterError("pole weights must be positive")
            order = self.local_order(p)
            if order != -2:
                raise ParameterError(f"declared pole {p!r} has order {order}, not a double pole")
            c = self.leading_coefficient(p)
            if abs(math.sqrt(abs(c)) - a / 2) > RESIDUE_TOL * max(1.0, a):
                raise ParameterError(
                    f"weight {a} at {p!r} inconsistent with residue {math.sqrt(abs(c))}"
                )
            declared[p] = a
        if self.order_at_infinity() < -2:
            raise ParameterError("numerator degree too large: pole of order > 2 at infinity")
        for r in self.denom_roots:
            if self.local_order(r) == -2 and not any(_same(r, p) for p in declared):
                raise ParameterError(f"undeclared double pole at {r}")
        if self.order_at_infinity() == -2 and INF not in declared:
            raise ParameterError("undeclared double pole at infinity")

    @property
    def divisor(self) -> WeightedDivisor:
        return WeightedDivisor(self.poles)

    # ------------------------------------------------------------ evaluation
    def value(self, z: complex) -> complex:
        den = 1 + 0j
        for r in self.denom_roots:
            den *= (z - r) * (z - r)
        return self.factor * _horner(self._c, z) / den

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        num = np.polyval(np.array(self._c[::-1]), z)
        den = np.ones_like(z)
        for r in self.denom_roots:
            den = den * (z - r) ** 2
        return self.factor * num / den

    def at_infinity_chart(self, w: complex) -> complex:
        """``psi(w) = phi(1/w) / w**4``, the coefficient in the chart ``w = 1/z``."""
        z = 1.0 / w
        return self.value(z) / w**4

    def singular_points(self) -> list:
        """Finite points where ``phi`` has a pole."""
        return [r for r in self.denom_roots if self.local_order(r) < 0]

    # ---------------------------------------------------------- constructors
    @classmethod
    def from_residues(cls, residues) -> "QuadDiff":
        """``phi = (sum_k c_k / (z - p_k))**2`` for real residues ``c_k``.

        Each finite ``p_k`` becomes a double pole of weight ``2|c_k|``; when
        ``sum c_k != 0`` infinity is a double pole of weight ``2|sum c_k|``.
        """
        pts = [complex(p) for p, _ in residues]
        cs = [float(c) for _, c in residues]
        num = [0j]
        for k, ck in enumerate(cs):
            others = [p for j, p in enumerate(pts) if j != k]
            num = _poly_add(num, [ck * x for x in _poly_from_roots(others)])
        num = _poly_mul(num, num)
        poles = [(p, 2 * abs(c)) for p, c in zip(pts, cs)]
        total = sum(cs)
        if abs(total) > 1e-14:
            poles.append((INF, 2 * abs(total)))
        else:
            num = _trim([x if abs(x) > 1e-15 * max(1, max(map(abs, num))) else 0 for x in num])
        return cls(tuple(num), tuple(pts), tuple(poles), 1.0)

    @classmethod
    def from_disc_divisor(cls, d: WeightedDivisor) -> "QuadDiff":
        """``(d/dz G_{D,d})**2`` for the unit disc, extended by reflection."""
        res = []
        for w, a in d.atoms:
            if w is INF or not abs(w) < 1:
                raise ParameterError("divisor must lie in the open unit disc")
            res.append((w, -a / 2))
            if w != 0:
                res.append((1 / w.conjugate(), a / 2))
        return cls.from_residues(res)


def _deflate(c: list, p: complex) -> list:
    """Synthetic division of ascending ``c`` by ``(z - p)``, remainder dropped."""
    n = len(c) - 1
    if n == 0:
        return [0j]
    q = [0j] * n
    acc = c[n]
    q[n - 1] = acc
    for k in range(n - 1, 0, -1):
        acc = c[k] + p * acc
        q[k - 1] = acc
    return q


def build_three_source(a0: float, a1: float, a_inf: float) -> QuadDiff:
    """Quadratic differential with double poles at 0, 1 and infinity.

    ``phi = (a0**2 + (a1**2 - a0**2 - a_inf**2) z + a_inf**2 z**2) / (4 z**2 (z - 1)**2)``

    The weights ``a1`` and ``a_inf`` may vanish, in which case the
    corresponding point is a simple pole or regular instead of a source.
    """
    a0, a1, a_inf = float(a0), float(a1), float(a_inf)
    if not a0 > 0:
        raise ParameterError("a0 must be positive")
    if a1 < 0 or a_inf < 0:
        raise ParameterError("a1 and a_inf must be nonnegative")
    num = (a0 * a0, a1 * a1 - a0 * a0 - a_inf * a_inf, a_inf * a_inf)
    poles = [(0j, a0)]
    if a1 > 0:
        poles.append((1 + 0j, a1))
    if a_inf > 0:
        poles.append((INF, a_inf))
    return QuadDiff(num, (0j, 1 + 0j), tuple(poles), 0.25)


# ------------------------------------------------------------ critical points
def _numerator_roots(c: list) -> list:
    n = len(c) - 1
    if n == 0:
        return []
    if n == 1:
        return [-c[0] / c[1]]
    if n == 2:
        a, b, cc = c[2], c[1], c[0]
        disc = cmath.sqrt(b * b - 4 * a * cc)
        # pick the sign avoiding cancellation, recover the other root from the product
        q = -0.5 * (b + disc) if abs(b + disc) >= abs(b - disc) else -0.5 * (b - disc)
        if q == 0:
            return [0j, 0j]
        return [q / a, cc / q]
    return [complex(r) for r in np.roots(np.array(c[::-1]))]


def _cluster(roots: list, tol: float) -> list:
    groups = []
    for r in roots:
        for g in groups:
            if abs(g[0] - r) <= tol * max(1.0, abs(r)):
                g.append(r)
                break
        else:
            groups.append([r])
    return [(sum(g) / len(g), len(g)) for g in groups]


def finite_critical_points(qd: QuadDiff) -> list:
    """Finite zeros and simple poles of ``phi`` as ``(point, order)`` pairs.

    Zeros carry their multiplicity; a simple pole has order ``-1``. Points
    where a numerator root cancels a double pole completely are regular and
    are not reported.
    """
    c = list(qd.numerator)
    if all(x == 0 for x in c):
        raise DegenerateError("numerator is identically zero")
    roots = _numerator_roots(c)
    tol = 1e-12 if len(c) <= 3 else 1e-6
    out = []
    for r, m in _cluster(roots, tol):
        hit = [d for d in qd.denom_roots if abs(d - r) <= tol * max(1.0, abs(d))]
        if hit:
            order = m - 2
            r = hit[0]
        else:
            order = m
        if order != 0 and order != -2:
            out.append((r, order))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def separatrix_directions(qd: QuadDiff, point: complex, order: int) -> list:
    """Unit tangents of the vertical rays leaving a zero or simple pole.

    With ``phi ~ c (z - p)**m`` the rays satisfy ``arg(c) + (m + 2) theta = pi``.
    """
    c = qd.leading_coefficient(point)
    n = order + 2
    base = (math.pi - cmath.phase(c)) / n
    return [cmath.exp(1j * (base + 2 * math.pi * k / n)) for k in range(n)]


# ------------------------------------------------------------------ residues
def _branch(s: complex, ref: complex) -> complex:
    return -s if abs(s - ref) > abs(s + ref) else s


def residue_sqrt(qd: QuadDiff, pole, n: int = 256) -> float:
    """``|Res sqrt(phi)|`` at a declared double pole, by contour integration.

    The contour is a circle of radius half the distance to the nearest other
    critical point; the trapezoid rule on it converges geometrically.
    """
    pole = as_point(pole)
    if not any(_same(pole, p) for p, _ in qd.poles):
        raise ParameterError(f"{pole!r} is not a declared double pole")
    if pole is INF:
        f = qd.at_infinity_chart
        center = 0j
        others = [1 / r for r in qd.denom_roots if r != 0]
        others += [1 / z for z, _ in finite_critical_points(qd) if z != 0]
    else:
        f = qd.value
        center = pole
        others = [r for r in qd.denom_roots if r != pole]
        others += [z for z, _ in finite_critical_points(qd)]
    others = [z - center for z in others if z != center]
    rho = 0.5 * min((abs(z) for z in others), default=2.0)
    rho = min(rho, 1.0)
    theta = 2 * math.pi * np.arange(n) / n
    for _ in range(9):
        pts = center + rho * np.exp(1j * theta)
        s = [cmath.sqrt(f(complex(z))) for z in pts]
        for k in range(1, n):
            s[k] = _branch(s[k], s[k - 1])
        closing = _branch(cmath.sqrt(f(complex(pts[0]))), s[-1])
        if abs(closing - s[0]) <= 1e-6 * abs(s[0]):
            vals = np.array(s) * (pts - center)
            return float(abs(np.mean(vals)))
        rho *= 0.5
    raise BranchError(f"square root branch flips on every contour around {pole!r}")


# ------------------------------------------------------------------- tracing
class _Field:
    """Scalar evaluation of ``sqrt(phi)`` with branch continuation."""

    def __init__(self, qd: QuadDiff):
        self.c = list(qd.numerator)
        self.roots = list(qd.denom_roots)
        self.factor = qd.factor

    def phi(self, z: complex) -> complex:
        acc = 0j
        for a in reversed(self.c):
            acc = acc * z + a
        den = 1 + 0j
        for r in self.roots:
            d = z - r
            den *= d * d
        return self.factor * acc / den

    def s(self, z: complex, ref: complex) -> complex:
        w = cmath.sqrt(self.phi(z))
        return -w if abs(w - ref) > abs(w + ref) else w

    @staticmethod
    def v(s: complex) -> complex:
        return 1j * s.conjugate() / abs(s)

    def rk4(self, z: complex, s: complex, h: float):
        s1 = s
        k1 = self.v(s1)
        s2 = self.s(z + 0.5 * h * k1, s1)
        k2 = self.v(s2)
        s3 = self.s(z + 0.5 * h * k2, s2)
        k3 = self.v(s3)
        s4 = self.s(z + h * k3, s3)
        k4 = self.v(s4)
        zn = z + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        return zn, self.s(zn, s4)

    def chord(self, a: complex, b: complex, s_ref: complex, singular_start: bool = False) -> complex:
        """``int_a^b sqrt(phi) dz`` along the segment, 8-point Gauss-Legendre.

        ``s_ref`` is the branch at ``a`` (at ``b`` when ``singular_start``,
        where ``a`` is a zero and ``t = u**2`` removes the square-root cusp).
        """
        d = b - a
        total = 0j
        if singular_start:
            ref = s_ref
            for t, w in zip(reversed(_GL_T), reversed(_GL_W)):
                ref = self.s(a + t * t * d, ref)
                total += w * ref * 2 * t
            return total * d
        ref = s_ref
        for t, w in zip(_GL_T, _GL_W):
            ref = self.s(a + t * d, ref)
            total += w * ref
        return total * d


def _angle(a: complex, b: complex) -> float:
    return abs(cmath.phase(a / b))


def trace_vertical(
    qd: QuadDiff,
    start,
    direction,
    step: float = 1e-3,
    max_arclen: float = 50.0,
    critical=None,
    tol: float = 1e-10,
) -> PathCurve:
    """Trace the vertical trajectory of ``qd`` leaving ``start`` along ``direction``.

    Parameters
    ----------
    qd : QuadDiff
    start : complex
        Regular point or finite zero/simple pole of ``qd``; not a double pole.
    direction : complex
        Initial tangent. At a regular point ``phi(start) direction**2`` must
        be negative real (to 0.1 rad); at a zero of order ``m`` it must be one
        of the ``m + 2`` separatrix directions.
    step : float
        Maximum step, also the radius of the termination balls. Outside the
        disc of radius ``1 + max|pole|`` the step cap grows like ``|z|``, so
        loops around the pole at infinity cost a bounded number of steps.
    max_arclen : float
    critical : list of (complex, int), optional
        Critical points used for the termination test; computed if omitted.
    tol : float
        Local error tolerance of the step-doubling RK4 integrator.

    Returns
    -------
    PathCurve
        ``status`` is one of ``closed``, ``critical``, ``arclen``, ``escape``.
        ``meta`` holds ``start_vertex``, ``end_vertex``, ``end_gap``,
        ``closure_gap`` and ``level_residual`` where applicable.
    """
    start = complex(start)
    direction = complex(direction)
    if direction == 0:
        raise ParameterError("direction must be nonzero")
    direction /= abs(direction)
    if critical is None:
        critical = finite_critical_points(qd)
    fld = _Field(qd)
    poles = [r for r in qd.denom_roots if qd.local_order(r) <= -2]
    for p in poles:
        if abs(start - p) < 1e-14:
            raise SingularStartError(f"trajectory cannot start at the pole {p}")
    crit_pts = [z for z, _ in critical]
    start_vertex = None
    for k, (z, m) in enumerate(critical):
        if abs(start - z) <= 1e-12 * max(1.0, abs(z)):
            start_vertex = k
            start = z
    scale = max([abs(p) for p in qd.denom_roots] + [abs(z) for z in crit_pts] + [0.0])
    r_esc = 10.0 * (1.0 + scale)
    sing = poles + [z for z, m in critical if m < 0]
    r_unit = 1.0 + max([abs(p) for p in poles] + [0.0])

    def h_cap(z):
        return step * max(1.0, abs(z) / r_unit)

    def h_limit(z):
        lim = h_cap(z)
        for p in sing:
            lim = min(lim, 0.05 * abs(z - p))
        for q in crit_pts:
            d = abs(z - q)
            if d > 0:
                lim = min(lim, max(0.25 * d, 0.25 * step))
        return lim

    pts = [start]
    meta = {"start_vertex": start_vertex}
    if start_vertex is not None:
        m = critical[start_vertex][1]
        c = qd.leading_coefficient(start)
        if _angle(c * direction ** (m + 2), -1) > DIRECTION_TOL:
            raise ParameterError("direction is not a separatrix direction at this critical point")
        z = start + step * direction
        w = cmath.sqrt(fld.phi(z))
        s = w if (fld.v(w) * direction.conjugate()).real > 0 else -w
        F = fld.chord(start, z, s, singular_start=True)
        # Newton onto Re F = 0; the cusp at the zero makes one pass too coarse
        for _ in range(8):
            zc = z - F.real * s.conjugate() / abs(s) ** 2
            s = fld.s(zc, s)
            F = fld.chord(start, zc, s, singular_start=True)
            z = zc
            if abs(F.real) <= 1e-3 * tol:
                break
        pts.append(z)
        arclen = abs(z - start)
    else:
        phi0 = fld.phi(start)
        if phi0 == 0:
            raise ParameterError("start is a zero of phi not listed among the critical points")
        if _angle(phi0 * direction**2, -1) > DIRECTION_TOL:
            raise ParameterError("phi(start) direction**2 is not negative")
        w = cmath.sqrt(phi0)
        s = w if (fld.v(w) * direction.conjugate()).real > 0 else -w
        z = start
        F = 0j
        arclen = 0.0
    left_start = False
    h = min(step, h_limit(z))
    status = OPEN
    closed = False
    while True:
        hmax = h_limit(z)
        h = min(h, hmax)
        while True:
            z1, _ = fld.rk4(z, s, h)
            zh, sh = fld.rk4(z, s, 0.5 * h)
            z2, s2 = fld.rk4(zh, sh, 0.5 * h)
            err = abs(z1 - z2) / 15.0
            if err <= tol:
                break
            h *= 0.5
            if h < MIN_STEP:
                raise StepError(f"step underflow at z={z}")
        Fp = F + fld.chord(z, z2, s)
        zc = z2 - Fp.real * s2.conjugate() / abs(s2) ** 2
        sc = fld.s(zc, s2)
        F = F + fld.chord(z, zc, s)
        arclen += abs(zc - z)
        z, s = zc, sc
        pts.append(z)
        h = min(2 * h, h_cap(z)) if err < tol / 32 else h

        if not left_start and abs(z - start) > 2 * h_cap(start):
            left_start = True
        hit = None
        for k, q in enumerate(crit_pts):
            if k == start_vertex and not left_start:
                continue
            if abs(z - q) < step:
                hit = k
                break
        if hit is not None:
            q = crit_pts[hit]
            gap, F = _refine_approach(fld, z, s, F, q)
            meta["end_vertex"] = hit
            meta["end_gap"] = gap
            pts.append(q)
            status = CRITICAL
            if hit == start_vertex:
                closed = True
                meta["closure_gap"] = gap
            break
        if start_vertex is None and left_start and abs(z - start) < h_cap(start):
            if _angle(fld.v(s), direction) < CLOSURE_ANGLE:
                # transverse miss of the start point relative to the local tangent
                t = fld.v(s)
                meta["closure_gap"] = abs(((start - z) * t.conjugate()).imag)
                status = CLOSED
                closed = True
                break
        if arclen > max_arclen:
            status = ARCLEN
            break
        if abs(z) > r_esc:
            status = ESCAPE
            break
    meta["level_residual"] = abs(F.real)
    meta["arclen"] = arclen
    meta["direction"] = direction
    return PathCurve(np.array(pts), closed=closed, status=status, meta=meta)


def _refine_approach(fld: _Field, z: complex, s: complex, F: complex, q: complex):
    """Follow the trajectory into a critical ball with shrinking steps.

    Returns the smallest distance to ``q`` reached and the updated integral.
    """
    best = abs(z - q)
    for _ in range(200):
        d = abs(z - q)
        if d < 1e-9:
            break
        h = 0.25 * d
        zn, sn = fld.rk4(z, s, h)
        Fp = F + fld.chord(z, zn, s)
        zc = zn - Fp.real * sn.conjugate() / abs(sn) ** 2
        if abs(zc - q) < 1e-12:
            best = abs(zc - q)
            break
        sc = fld.s(zc, sn)
        Fn = F + fld.chord(z, zc, s)
        dn = abs(zc - q)
        if dn >= d:
            break
        z, s, F = zc, sc, Fn
        best = dn
    return best, F


def level_drift(qd: QuadDiff, curve: PathCurve, nodes: int = 16) -> np.ndarray:
    """``Re int sqrt(phi)`` from the first vertex to every vertex of ``curve``.

    Composite Gauss-Legendre with ``nodes`` points per polyline segment and
    branch continuation along the curve. A first or last vertex at a zero of
    ``phi`` is handled with the substitution ``t = u**2``.
    """
    fld = _Field(qd)
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    v = curve.vertices
    if len(v) < 2:
        return np.zeros(len(v))
    crit = [z for z, m in finite_critical_points(qd)]
    at_crit = [any(abs(p - q) < 1e-12 for q in crit) for p in v]
    out = np.zeros(len(v))
    total = 0j
    # reference branch at the middle of the first segment
    mid = 0.5 * (v[0] + v[1])
    ref = cmath.sqrt(fld.phi(mid))
    for k in range(len(v) - 1):
        a, b = complex(v[k]), complex(v[k + 1])
        d = b - a
        acc = 0j
        if at_crit[k]:
            r = ref
            for tt, ww in sorted(zip(t, w), reverse=True):
                r = fld.s(a + tt * tt * d, r)
                acc += ww * r * 2 * tt
            ref = fld.s(b, fld.s(a + t[-1] ** 2 * d, ref))
        elif at_crit[k + 1]:
            # cusp at b: t = 1 - u**2, walked from a towards b
            r = ref
            for uu, ww in sorted(zip(t, w), reverse=True):
                r = fld.s(a + (1 - uu * uu) * d, r)
                acc += ww * r * 2 * uu
        else:
            r = ref
            for tt, ww in zip(t, w):
                r = fld.s(a + tt * d, r)
                acc += ww * r
            ref = fld.s(b, r)
        total += acc * d
        out[k + 1] = total.real
    return out


# ------------------------------------------------------------ critical graph
@dataclass(frozen=True, eq=False)
class Edge:
    curve: PathCurve
    start: int
    end: int | None
    status: str
    direction: complex
    error: str | None = None


@dataclass(frozen=True, eq=False)
class CriticalGraph:
    """Separatrices of a quadratic differential.

    ``vertices`` are ``(point, order)`` pairs; every edge starts at
    ``vertices[edge.start]``.
    """

    vertices: list
    edges: list
    step: float

    @property
    def points(self) -> list:
        return [z for z, _ in self.vertices]

    def closed_loops(self) -> list:
        return [e for e in self.edges if e.curve.closed]

    def crossings(self, tol: float | None = None) -> list:
        """Pairs of edges crossing away from the vertices."""
        tol = 2 * self.step if tol is None else tol
        bad = []
        es = [e for e in self.edges if e.error is None and len(e.curve) > 1]
        for i in range(len(es)):
            for j in range(i + 1, len(es)):
                pts = crossing_points(es[i].curve, es[j].curve, allowed=self.points, tol=tol)
                if pts:
                    bad.append((i, j, pts))
        return bad


def critical_graph(qd: QuadDiff, step: float = 1e-3, max_arclen: float | None = None) -> CriticalGraph:
    """Trace all separatrices from the finite zeros and simple poles.

    Coincident edges (Hausdorff distance below ``10 * step``) are kept once.
    Closed loops are stored with positive orientation. A failing edge is
    kept with ``error`` set and an empty curve.
    """
    critical = finite_critical_points(qd)
    if max_arclen is None:
        scale = max([abs(p) for p in qd.denom_roots] + [abs(z) for z, _ in critical] + [0.0])
        max_arclen = 40.0 * (1.0 + scale)
    edges = []
    for k, (p, m) in enumerate(critical):
        for d in separatrix_directions(qd, p, m):
            try:
                if m < 0:
                    c = trace_vertical(qd, p + step * d, d, step, max_arclen, critical)
                    c = PathCurve(np.concatenate(([p], c.points)), c.closed, c.status, c.meta)
                else:
                    c = trace_vertical(qd, p, d, step, max_arclen, critical)
            except (StepError, BranchError, ParameterError) as exc:
                edges.append(Edge(PathCurve(np.array([p])), k, None, "error", d, str(exc)))
                continue
            end = c.meta.get("end_vertex")
            if c.closed:
                c = c.oriented(True)
            dup = False
            for e in edges:
                if e.error is not None or {e.start, e.end} != {k, end}:
                    continue
                if hausdorff_curves(e.curve, c, step=step) < 10 * step:
                    dup = True
                    break
            if not dup:
                edges.append(Edge(c, k, end, c.status, d))
    return CriticalGraph(critical, edges, step)
