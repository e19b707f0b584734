"""Stationary Jordan curves: level-line potentials, energies and variations.

The level-line potential of a pair of divisors is

    R(z) = sum_j b_j log|z - w_j|^{-1} - sum_j a_j log|z - z_j|^{-1} + offset

which is ``Re F`` for ``F = -sum b_j log(z - w_j) + sum a_j log(z - z_j)``.
Its gradient, written as a complex number, is ``conj(F')``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .curves import BOUNDARY, CLOSED, OPEN, PathCurve, is_simple
from .errors import (
    BranchError,
    CriticalLevelError,
    DomainError,
    ParameterError,
    PoleError,
    SeedError,
    UnsupportedDomainError,
)
from .kernels import INF, WeightedDivisor, conformal_radius_disc, greens_disc

GRAD_TOL = 1e-10
CLASSIFY_TOL = 1e-10


# ---------------------------------------------------------------- potentials
@dataclass(frozen=True)
class LevelPotential:
    """``R = -sum_pos b log|z - w| + sum_neg a log|z - z_j| + offset``.

    ``pos`` holds the logarithmic poles where ``R -> +inf`` and ``neg`` those
    where ``R -> -inf``. Both must be finite divisors with disjoint supports;
    the point at infinity is implicit.
    """

    pos: WeightedDivisor = WeightedDivisor()
    neg: WeightedDivisor = WeightedDivisor()
    offset: float = 0.0

    def __post_init__(self):
        for p in self.pos.points + self.neg.points:
            if p is INF:
                raise ParameterError("the point at infinity is implicit in a LevelPotential")
        for p in self.pos.points:
            if p in self.neg.points:
                raise ParameterError(f"{p} lies in both supports")

    @property
    def charges(self) -> list:
        """``(point, c)`` with ``F' = sum c / (z - point)``."""
        return [(p, -b) for p, b in self.pos.atoms] + [(p, a) for p, a in self.neg.atoms]

    def __call__(self, z) -> float:
        return potential_value(self, z)

    def dF(self, z: complex) -> complex:
        return sum(c / (z - p) for p, c in self.charges)

    def gradient(self, z: complex) -> complex:
        return self.dF(z).conjugate()

    def values(self, z: np.ndarray) -> np.ndarray:
        """Vectorised ``R`` on an array (no pole checks)."""
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, float(self.offset))
        for p, c in self.charges:
            out += c * np.log(np.abs(z - p))
        return out

    def saddles(self) -> list:
        """Finite zeros of ``F'``, i.e. critical points of ``R``."""
        pts = [p for p, _ in self.charges]
        num = np.zeros(1, dtype=complex)
        for k, (p, c) in enumerate(self.charges):
            others = [q for j, q in enumerate(pts) if j != k]
            num = np.polyadd(num, c * np.poly(others) if others else np.array([c]))
        num = np.trim_zeros(num, "f")
        if len(num) <= 1:
            return []
        return [complex(r) for r in np.roots(num)]

    def __add__(self, other: "LevelPotential") -> "LevelPotential":
        return LevelPotential(self.pos + other.pos, self.neg + other.neg, self.offset + other.offset)


def potential_value(R: LevelPotential, z) -> float:
    z = complex(z)
    total = float(R.offset)
    for p, c in R.charges:
        if z == p:
            raise PoleError(f"potential evaluated at its pole {p}")
        total += c * math.log(abs(z - p))
    return total


# ---------------------------------------------------------------- level lines
def _newton(R: LevelPotential, z: complex, level: float, iters: int = 30) -> complex:
    for _ in range(iters):
        g = R.gradient(z)
        if abs(g) < GRAD_TOL:
            raise CriticalLevelError(f"|grad R| < {GRAD_TOL} at {z}")
        r = potential_value(R, z) - level
        z = z - r * g / abs(g) ** 2
        if abs(r) < 1e-14 * (1 + abs(level)):
            break
    return z


def _tangent(R: LevelPotential, z: complex) -> complex:
    g = R.gradient(z)
    n = abs(g)
    if n < GRAD_TOL:
        raise CriticalLevelError(f"|grad R| < {GRAD_TOL} at {z}: the level runs through a saddle")
    return 1j * g / n


def _default_step(R: LevelPotential, seed: complex) -> float:
    d = min((abs(seed - p) for p, _ in R.charges), default=1.0)
    return 1e-3 * max(d, 1e-3)


def trace_level(
    R: LevelPotential,
    level: float,
    seed,
    step: float | None = None,
    clip: Callable[[complex], float] | None = None,
    max_points: int = 2_000_000,
) -> PathCurve:
    """Trace the component of ``{R = level}`` through ``seed``.

    The seed is first pulled onto the level by Newton's method along
    ``grad R``. The curve is then followed along ``i grad R`` (supports of
    ``neg`` to the left) with an RK4 predictor and Newton corrector.

    Parameters
    ----------
    clip : callable, optional
        Region ``clip(z) < 0`` to which the trace is confined. When the level
        line leaves it the curve becomes an open arc ending on ``clip = 0``,
        traced in both directions from the seed.

    Returns
    -------
    PathCurve
        ``meta`` carries ``jordan`` (closed and simple), ``separates``
        (winding numbers constant and different on the two supports) and
        ``step``.
    """
    level = float(level)
    z0 = complex(seed)
    step = _default_step(R, z0) if step is None else float(step)
    z = _newton(R, z0, level)
    if not abs(potential_value(R, z) - level) < 1e-6:
        raise SeedError(f"Newton did not reach the level from {seed}")
    crit = []
    for s in R.saddles():
        try:
            v = potential_value(R, s)
        except PoleError:
            continue
        if abs(v - level) < 1e-8 * (1 + abs(level)):
            if clip is not None and abs(clip(s)) < 1e-8:
                continue
            crit.append(s)

    def march(z, sign):
        pts = [z]
        left = False
        while True:
            t = sign * _tangent(R, z)
            k2 = sign * _tangent(R, z + 0.5 * step * t)
            k3 = sign * _tangent(R, z + 0.5 * step * k2)
            k4 = sign * _tangent(R, z + step * k3)
            zp = z + step * (t + 2 * k2 + 2 * k3 + k4) / 6
            zn = _newton(R, zp, level, iters=3)
            for s in crit:
                if abs(zn - s) < 5 * step:
                    raise CriticalLevelError(f"level {level} passes through the saddle {s}")
            if clip is not None and clip(zn) > -2 * step:
                pts.append(zn)
                pts.append(_clip_crossing(clip, zn, sign * _tangent(R, zn), step))
                return pts, BOUNDARY
            if not left and abs(zn - pts[0]) > 2 * step:
                left = True
            if left and abs(zn - pts[0]) < 1.01 * step and sign > 0:
                if abs(cmath.phase(_tangent(R, zn) / _tangent(R, pts[0]))) < 0.5:
                    return pts + [zn], CLOSED
            pts.append(zn)
            z = zn
            if len(pts) > max_points:
                raise SeedError("level line did not close within the point budget")

    fwd, status = march(z, 1.0)
    if status == CLOSED:
        curve = PathCurve(np.array(fwd), closed=True, status=CLOSED)
    else:
        back, _ = march(z, -1.0)
        pts = np.array(back[::-1] + fwd[1:])
        curve = PathCurve(pts, closed=False, status=BOUNDARY)
    meta = {"step": step, "seed": z, "level": level}
    meta["jordan"] = bool(curve.closed and is_simple(curve))
    meta["separates"] = bool(curve.closed and _separates(curve, R))
    object.__setattr__(curve, "meta", meta)
    return curve


def _clip_crossing(g, z: complex, t: complex, step: float) -> complex:
    """Point where the ray ``z + s t`` meets ``g = 0`` (``z`` itself if it does not)."""
    if g(z) >= 0:
        return z
    s_max = 8 * step
    if g(z + s_max * t) < 0:
        return z
    s = brentq(lambda s: g(z + s * t), 0.0, s_max, xtol=1e-15)
    return z + s * t


def _separates(curve: PathCurve, R: LevelPotential) -> bool:
    wn = {curve.winding_number(p) for p in R.neg.points}
    wp = {curve.winding_number(p) for p in R.pos.points} | {0}
    return len(wn) == 1 and len(wp) == 1 and wn != wp


def disc_clip(z: complex) -> float:
    """Signed distance to the unit circle, negative inside."""
    return abs(z) - 1.0


# -------------------------------------------------------------- four droplets
@dataclass(frozen=True)
class FourDropletSpec:
    """``R = a R_{x1} - b R_{x2}`` with ``R_x(z) = log|(1 - z x) / (z - x)|``."""

    x1: float
    x2: float
    a: float
    b: float

    def __post_init__(self):
        for x in (self.x1, self.x2):
            if not -1 < x < 1:
                raise ParameterError("x1 and x2 must lie in (-1, 1)")
        if self.x1 == self.x2:
            raise ParameterError("x1 and x2 must differ")
        if not (self.a > 0 and self.b > 0):
            raise ParameterError("weights must be positive")

    @staticmethod
    def R_x(x: float, z):
        return np.log(np.abs((1 - z * x) / (z - x)))

    def value(self, z):
        """Closed-form ``R``; works on scalars and arrays."""
        return self.a * self.R_x(self.x1, z) - self.b * self.R_x(self.x2, z)

    def singular_points(self) -> list:
        pts = [complex(self.x1), complex(self.x2)]
        pts += [complex(1 / x) for x in (self.x1, self.x2) if x != 0]
        return pts

    def potential(self) -> LevelPotential:
        """The same function as a :class:`LevelPotential`."""
        pos, neg = [(self.x1, self.a)], [(self.x2, self.b)]
        offset = 0.0
        if self.x1 != 0:
            neg.append((1 / self.x1, self.a))
            offset += self.a * math.log(abs(self.x1))
        if self.x2 != 0:
            pos.append((1 / self.x2, self.b))
            offset -= self.b * math.log(abs(self.x2))
        return LevelPotential(WeightedDivisor(tuple(pos)), WeightedDivisor(tuple(neg)), offset)


def classify_four_droplet(spec: FourDropletSpec, z) -> str:
    """Droplet label ``D1``..``D4`` of ``z``, or ``boundary``."""
    z = complex(z)
    for p in spec.singular_points():
        if z == p:
            raise PoleError(f"{z} is a source point")
    r = float(spec.value(z))
    if abs(abs(z) - 1) <= CLASSIFY_TOL or abs(r) <= CLASSIFY_TOL:
        return "boundary"
    if abs(z) < 1:
        return "D1" if r > 0 else "D2"
    return "D4" if r > 0 else "D3"


def _real_zero_seeds(spec: FourDropletSpec, n: int = 4001) -> list:
    xs = np.linspace(-1, 1, n)[1:-1]
    poles = sorted({spec.x1, spec.x2})
    seeds = []
    bounds = [-1.0] + poles + [1.0]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        seg = xs[(xs > lo) & (xs < hi)]
        if len(seg) < 2:
            continue
        vals = spec.value(seg.astype(complex))
        for k in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
            f = lambda x: float(spec.value(complex(x)))
            seeds.append(brentq(f, seg[k], seg[k + 1], xtol=1e-15))
    return seeds


def four_droplet_curves(spec: FourDropletSpec, step: float = 1e-3) -> dict:
    """Level-0 interfaces of the four-droplet configuration.

    Returns ``{"inner": [...], "outer": [...], "circle": PathCurve}``; the
    outer curves are the images of the inner ones under ``z -> 1/z``.
    """
    R = spec.potential()
    inner = []
    for s in _real_zero_seeds(spec):
        if any(_near_curve(c, s, 3 * step) for c in inner):
            continue
        inner.append(trace_level(R, 0.0, s, step=step, clip=disc_clip))
    outer = []
    for c in inner:
        outer.append(PathCurve(1.0 / c.points, c.closed, c.status, dict(c.meta)))
    t = 2 * math.pi * np.arange(4096) / 4096
    circle = PathCurve(np.exp(1j * t), closed=True)
    return {"inner": inner, "outer": outer, "circle": circle}


def _near_curve(c: PathCurve, z: complex, tol: float) -> bool:
    return bool(np.min(np.abs(c.points - z)) < tol)


# ------------------------------------------------------------------ energies
def reduced_energy_circle_pair(center, radius: float) -> float:
    """``I(gamma, 1.0, 1.inf)`` for the circle ``|z - center| = radius``."""
    center = complex(center)
    if not radius > 0:
        raise ParameterError("radius must be positive")
    q = abs(center) ** 2 / radius**2
    if not q < 1:
        raise DomainError("0 is not inside the circle")
    return math.log1p(-q)


@dataclass(frozen=True)
class MobiusDomain:
    """Domain ``{z : |w(z)| < 1}`` for ``w(z) = (a z + b) / (c z + d)``.

    ``w`` is the uniformizing map onto the unit disc. Discs, disc
    complements and half-planes are all of this form.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if self.a * self.d - self.b * self.c == 0:
            raise ParameterError("degenerate Mobius map")

    @classmethod
    def unit_disc(cls) -> "MobiusDomain":
        return cls(1, 0, 0, 1)

    @classmethod
    def disc(cls, center, radius: float) -> "MobiusDomain":
        return cls(1, -complex(center), 0, radius)

    @classmethod
    def disc_exterior(cls, center, radius: float) -> "MobiusDomain":
        return cls(0, radius, 1, -complex(center))

    def w(self, z):
        if z is INF:
            if self.c == 0:
                raise DomainError("infinity is not in the domain")
            return self.a / self.c
        return (self.a * z + self.b) / (self.c * z + self.d)

    def dw(self, z) -> complex:
        """``w'`` at ``z``; at infinity, the derivative in the chart ``1/z``."""
        det = self.a * self.d - self.b * self.c
        if z is INF:
            return -det / self.c**2
        return det / (self.c * z + self.d) ** 2

    def contains(self, z) -> bool:
        if z is INF:
            return self.c != 0 and abs(self.a / self.c) < 1
        den = self.c * z + self.d
        return den != 0 and abs((self.a * z + self.b) / den) < 1


def reduced_energy_general(domain, d: WeightedDivisor) -> float:
    """Reduced Green's energy ``I(D, d)`` of a Mobius image of the disc.

    ``I = sum_{j != k} a_j a_k G_D(z_j, z_k) + sum_j a_j**2 M_D(z_j)`` with
    ``M_D(z) = log((1 - |w(z)|**2) / |w'(z)|)`` in the standard coordinate
    (``1/z`` at infinity).
    """
    if not isinstance(domain, MobiusDomain):
        raise UnsupportedDomainError("only Mobius images of the unit disc are supported")
    pts, wts = d.points, d.weights
    for p in pts:
        if not domain.contains(p):
            raise DomainError(f"{p!r} is not in the domain")
    ws = [complex(domain.w(p)) for p in pts]
    total = 0.0
    for j in range(len(pts)):
        for k in range(len(pts)):
            if j != k:
                total += wts[j] * wts[k] * greens_disc(ws[j], ws[k])
    for p, a, w in zip(pts, wts, ws):
        r = conformal_radius_disc(0, 1.0, w) / abs(domain.dw(p))
        total += a * a * math.log(r)
    return total


# ---------------------------------------------------------------- variations
@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not self.radius > 0:
            raise ParameterError("radius must be positive")


def _as_circle(curve, rtol: float = 1e-9) -> Circle:
    if isinstance(curve, Circle):
        return curve
    if isinstance(curve, PathCurve) and curve.closed and len(curve) >= 3:
        p = curve.points
        A = np.column_stack([p.real, p.imag, np.ones(len(p))])
        rhs = np.abs(p) ** 2
        sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        c = complex(sol[0] / 2, sol[1] / 2)
        r = math.sqrt(sol[2] + abs(c) ** 2)
        if np.max(np.abs(np.abs(p - c) - r)) <= rtol * r:
            return Circle(c, r)
    raise UnsupportedDomainError("explicit Poisson kernels are only available on circles")


def _kernel_sums(circ: Circle, d: WeightedDivisor, dstar: WeightedDivisor, zeta: np.ndarray):
    c, r = circ.center, circ.radius
    P = np.zeros(zeta.shape)
    for z, a in d.atoms:
        if z is INF or not abs(z - c) < r:
            raise DomainError(f"{z!r} is not inside the curve")
        P += a * (r * r - abs(z - c) ** 2) / (r * np.abs(z - zeta) ** 2)
    Q = np.zeros(zeta.shape)
    for w, b in dstar.atoms:
        if w is INF:
            Q += b / r
            continue
        if not abs(w - c) > r:
            raise DomainError(f"{w!r} is not outside the curve")
        Q += b * (abs(w - c) ** 2 - r * r) / (r * np.abs(w - zeta) ** 2)
    return P, Q


def _circle_quadrature(circ: Circle, f, rtol: float = 1e-14, max_level: int = 22) -> float:
    """Trapezoid rule in the angle, doubled until the estimate settles."""
    prev = None
    n = 64
    for _ in range(max_level):
        t = 2 * math.pi * np.arange(n) / n
        zeta = circ.center + circ.radius * np.exp(1j * t)
        val = float(np.sum(f(zeta))) * (2 * math.pi * circ.radius / n)
        if prev is not None and abs(val - prev) <= rtol * max(1.0, abs(val)):
            return val
        prev = val
        n *= 2
    return prev


def hadamard_gradient_quadrature(curve, d: WeightedDivisor, dstar: WeightedDivisor) -> float:
    """Competitive variation of ``I(gamma, d, d*)`` on a circle.

    ``(1 / 2 pi) int (sum a P + sum b Q)(sum a P - sum b Q)**2 |dzeta|``.
    """
    circ = _as_circle(curve)

    def f(zeta):
        P, Q = _kernel_sums(circ, d, dstar, zeta)
        return (P + Q) * (P - Q) ** 2 / (2 * math.pi)

    return _circle_quadrature(circ, f)


def area_perimeter_variation(curve, d: WeightedDivisor, dstar: WeightedDivisor) -> tuple:
    """Competitive variations of the enclosed area and of the perimeter."""
    circ = _as_circle(curve)
    kappa = 1.0 / circ.radius

    def f(zeta):
        P, Q = _kernel_sums(circ, d, dstar, zeta)
        return P - Q

    area = _circle_quadrature(circ, f)
    perimeter = _circle_quadrature(circ, lambda z: kappa * f(z))
    return area, perimeter


# ------------------------------------------------------------------- welding
@dataclass(frozen=True)
class WeldingMap:
    """``h(z) = rotation * prod_j M_j(z)**a_j``, ``M_j(z) = (z - x_j)/(1 - conj(x_j) z)``."""

    anchors: tuple
    rotation: complex = 1 + 0j

    def __post_init__(self):
        anchors = tuple((complex(x), float(a)) for x, a in self.anchors)
        for x, a in anchors:
            if not a > 0:
                raise ParameterError("anchor weights must be positive")
        if abs(abs(complex(self.rotation)) - 1) > 1e-12:
            raise ParameterError("rotation must have unit modulus")
        object.__setattr__(self, "anchors", anchors)
        object.__setattr__(self, "rotation", complex(self.rotation))

    @property
    def degree(self) -> float:
        return sum(a for _, a in self.anchors)


def welding_lift(w: WeldingMap, theta):
    """Continuous argument of ``h(e^{i theta})``, real and increasing in theta."""
    for x, _ in w.anchors:
        if not abs(x) < 1:
            raise BranchError(f"anchor {x} is not inside the unit disc")
    theta = np.asarray(theta, dtype=float)
    total = np.full(theta.shape, cmath.phase(w.rotation))
    for x, a in w.anchors:
        # M(e^{it}) = e^{it} u / conj(u) with u = 1 - x e^{-it}, Re u > 0
        u = 1 - x * np.exp(-1j * theta)
        total = total + a * (theta + 2 * np.arctan2(u.imag, u.real))
    return total


def welding_evaluate(w: WeldingMap, theta):
    """``h(e^{i theta})`` on the unit circle."""
    deg = w.degree
    if abs(deg - round(deg)) > 1e-12:
        raise ParameterError(f"total weight {deg} is not an integer; h is not single valued")
    if round(deg) != 1:
        warnings.warn(f"total weight {deg}: h is a degree {round(deg)} covering", RuntimeWarning)
    out = np.exp(1j * welding_lift(w, theta))
    return complex(out) if np.ndim(out) == 0 else out
