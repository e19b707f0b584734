"""Closed-form complex-analytic primitives on the unit disc.

Points are plain Python ``complex`` numbers. The point at infinity is the
tagged value :data:`INF`; it is never encoded as an IEEE infinity.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Union

from .config import BOUNDARY_TOL
from .errors import DomainError, ParameterError, PoleError


class Infinity(enum.Enum):
    POINT = "inf"

    def __repr__(self):
        return "INF"


INF = Infinity.POINT

Point = Union[complex, Infinity]


def is_inf(p) -> bool:
    return p is INF


def as_point(p) -> Point:
    """Coerce numbers and the strings ``"inf"``/``"∞"`` to a point."""
    if p is INF or (isinstance(p, str) and p.strip().lower() in ("inf", "infinity", "∞")):
        return INF
    z = complex(p)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("non-finite coordinates; use INF for the point at infinity")
    return z


def invert(p: Point) -> Point:
    """The chart change z -> 1/z on the Riemann sphere."""
    if p is INF:
        return 0j
    if p == 0:
        return INF
    return 1.0 / p


@dataclass(frozen=True)
class WeightedDivisor:
    """Finite positive divisor ``sum a_j z_j``.

    ``atoms`` is a tuple of ``(point, weight)`` pairs with distinct points and
    strictly positive weights.
    """

    atoms: tuple = ()

    def __post_init__(self):
        atoms = tuple((as_point(p), float(a)) for p, a in self.atoms)
        seen = []
        for p, a in atoms:
            if not a > 0:
                raise ParameterError(f"divisor weights must be positive, got {a}")
            for q in seen:
                if q is INF or p is INF:
                    if q is p:
                        raise ParameterError("repeated point at infinity")
                elif q == p:
                    raise ParameterError(f"repeated point {p}")
            seen.append(p)
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def of(cls, *pairs) -> "WeightedDivisor":
        """``WeightedDivisor.of((0, 2.0), (1, 1.0))``."""
        return cls(tuple(pairs))

    @classmethod
    def single(cls, point, weight=1.0) -> "WeightedDivisor":
        return cls(((point, weight),))

    @property
    def weight(self) -> float:
        return sum(a for _, a in self.atoms)

    @property
    def points(self) -> list:
        return [p for p, _ in self.atoms]

    @property
    def weights(self) -> list:
        return [a for _, a in self.atoms]

    @property
    def finite_atoms(self) -> list:
        return [(p, a) for p, a in self.atoms if p is not INF]

    def weight_at(self, point) -> float:
        point = as_point(point)
        for p, a in self.atoms:
            if p is point or (p is not INF and point is not INF and p == point):
                return a
        return 0.0

    def scaled(self, factor: float) -> "WeightedDivisor":
        return WeightedDivisor(tuple((p, a * factor) for p, a in self.atoms))

    def mapped(self, f) -> "WeightedDivisor":
        """Push forward by a point map ``f``."""
        return WeightedDivisor(tuple((f(p), a) for p, a in self.atoms))

    def __add__(self, other: "WeightedDivisor") -> "WeightedDivisor":
        return WeightedDivisor(self.atoms + other.atoms)

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)


def _check_in_disc(z: complex, name: str):
    if not abs(z) < 1.0:
        raise DomainError(f"{name}={z} is not in the open unit disc")


@dataclass(frozen=True)
class DiscAutomorphism:
    """``z -> rotation * (z - x) / (1 - conj(x) z)``; sends ``x`` to 0."""

    x: complex = 0j
    rotation: complex = 1 + 0j

    def __post_init__(self):
        object.__setattr__(self, "x", complex(self.x))
        object.__setattr__(self, "rotation", complex(self.rotation))
        _check_in_disc(self.x, "x")
        if abs(abs(self.rotation) - 1.0) > 1e-12:
            raise ParameterError("rotation must have unit modulus")

    def __call__(self, z):
        z = complex(z)
        return self.rotation * (z - self.x) / (1 - self.x.conjugate() * z)

    def derivative(self, z):
        z = complex(z)
        return self.rotation * (1 - abs(self.x) ** 2) / (1 - self.x.conjugate() * z) ** 2

    def inverse(self) -> "DiscAutomorphism":
        lam = self.rotation
        # inverse is conj(lam) (w - y) / (1 - conj(y) w) with y = -lam x
        return DiscAutomorphism(-self.x * lam, 1 / lam)


def greens_disc(z, w) -> float:
    """Green's function of the unit disc, ``log|(1 - z conj(w)) / (z - w)|``."""
    z, w = complex(z), complex(w)
    _check_in_disc(z, "z")
    _check_in_disc(w, "w")
    if z == w:
        raise PoleError("greens_disc evaluated at its pole")
    return math.log(abs(1 - z * w.conjugate()) / abs(z - w))


def poisson_disc(z, zeta) -> float:
    """Poisson kernel of the unit disc without the ``1/(2 pi)`` factor."""
    z, zeta = complex(z), complex(zeta)
    _check_in_disc(z, "z")
    if abs(abs(zeta) - 1.0) > BOUNDARY_TOL:
        raise DomainError(f"zeta={zeta} is not on the unit circle")
    return (1 - abs(z) ** 2) / abs(z - zeta) ** 2


def greens_divisor_disc(d: WeightedDivisor, z) -> float:
    return sum(a * greens_disc(z, p) for p, a in d.atoms)


def conformal_radius_disc(center, radius: float, at) -> float:
    """Conformal radius of the disc ``|z - center| < radius`` seen from ``at``."""
    center, at = complex(center), complex(at)
    if not radius > 0:
        raise ParameterError("radius must be positive")
    r2 = abs(at - center) ** 2
    if not r2 < radius * radius:
        raise DomainError(f"{at} is not inside the disc")
    return (radius * radius - r2) / radius


def reduced_modulus_disc(center, radius: float, at) -> float:
    """``M_D(at) = log`` of the conformal radius, in the standard planar coordinate."""
    return math.log(conformal_radius_disc(center, radius, at))


def unit_circle(theta) -> complex:
    return cmath.exp(1j * theta)


def divisor_from_pairs(pairs: Iterable) -> WeightedDivisor:
    """Build a divisor from ``[[re, im, weight], ...]`` or ``[["inf", weight], ...]`` rows."""
    atoms = []
    for row in pairs:
        row = list(row)
        if len(row) == 2:
            atoms.append((as_point(row[0]), row[1]))
        elif len(row) == 3:
            atoms.append((complex(row[0], row[1]), row[2]))
        else:
            raise ParameterError(f"cannot parse divisor row {row!r}")
    return WeightedDivisor(tuple(atoms))
