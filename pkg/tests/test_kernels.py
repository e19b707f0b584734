import cmath
import math

import numpy as np
import pytest

from hslab.errors import DomainError, ParameterError, PoleError
from hslab.kernels import (INF, DiscAutomorphism, WeightedDivisor, conformal_radius_disc,
                           greens_disc, greens_divisor_disc, poisson_disc)


def random_disc_points(rng, n, rmax=0.95):
    r = rmax * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def walk_on_spheres_exit(z, n, rng, eps=1e-5):
    """Exit points of Brownian motion from ``z`` in the unit disc."""
    x = np.full(n, complex(z))
    active = np.ones(n, dtype=bool)
    while active.any():
        r = 1 - np.abs(x[active])
        done = r < eps
        idx = np.nonzero(active)[0]
        x[idx[done]] /= np.abs(x[idx[done]])
        active[idx[done]] = False
        step = idx[~done]
        x[step] += r[~done] * np.exp(2j * np.pi * rng.random(len(step)))
    return x


class TestGreensDisc:
    def test_center(self):
        assert greens_disc(0.5, 0) == pytest.approx(math.log(2), abs=1e-15)

    def test_symmetric_and_positive(self, rng):
        z, w = random_disc_points(rng, 1000), random_disc_points(rng, 1000)
        for a, b in zip(z, w):
            g = greens_disc(a, b)
            assert g > 0
            assert abs(g - greens_disc(b, a)) < 1e-12

    def test_monte_carlo_oracle(self):
        # G(z, w) = log 1/|z - w| - E log 1/|B_exit - w| for Brownian motion from z
        z, w = 0.3 + 0.4j, 0.1 - 0.2j
        rng = np.random.default_rng(7)
        exits = walk_on_spheres_exit(z, 10**6, rng)
        samples = np.log(np.abs(exits - w))
        est = -math.log(abs(z - w)) + samples.mean()
        sigma = samples.std() / math.sqrt(len(samples))
        assert abs(est - greens_disc(z, w)) < 4 * sigma + 2e-4

    def test_mobius_invariance(self, rng):
        for _ in range(200):
            x, z, w = random_disc_points(rng, 3, 0.9)
            M = DiscAutomorphism(x, cmath.exp(1j * rng.random() * 6))
            assert abs(greens_disc(M(z), M(w)) - greens_disc(z, w)) < 1e-12

    def test_errors(self):
        with pytest.raises(DomainError):
            greens_disc(1.0, 0)
        with pytest.raises(PoleError):
            greens_disc(0.2, 0.2)


class TestPoisson:
    def test_center(self):
        for t in np.linspace(0, 6, 7):
            assert poisson_disc(0, cmath.exp(1j * t)) == pytest.approx(1.0, abs=1e-15)

    def test_total_mass(self):
        n = 4096
        t = 2 * np.pi * np.arange(n) / n
        total = sum(poisson_disc(0.5, cmath.exp(1j * s)) for s in t) * 2 * np.pi / n
        assert abs(total - 2 * math.pi) < 1e-10

    def test_value(self):
        assert poisson_disc(0.5, 1) == pytest.approx(3.0, abs=1e-14)

    def test_normal_derivative(self, rng):
        h = 1e-6
        for z in random_disc_points(rng, 50, 0.8):
            zeta = cmath.exp(2j * math.pi * rng.random())
            fd = greens_disc(z, zeta * (1 - h)) / h
            assert fd == pytest.approx(poisson_disc(z, zeta), rel=1e-4)

    def test_off_circle(self):
        with pytest.raises(DomainError):
            poisson_disc(0.1, 0.9)


class TestDivisor:
    def test_linearity(self):
        assert greens_divisor_disc(WeightedDivisor.of((0, 1.0)), 0.5) == pytest.approx(math.log(2))
        assert greens_divisor_disc(WeightedDivisor.of((0, 2.0)), 0.5) == pytest.approx(2 * math.log(2))
        d = WeightedDivisor.of((0.3, 1.0), (-0.3, 1.0))
        assert greens_divisor_disc(d, 0.5j) == pytest.approx(
            greens_disc(0.5j, 0.3) + greens_disc(0.5j, -0.3), abs=1e-15)

    def test_weight_and_infinity(self):
        d = WeightedDivisor.of((0, 2.0), (INF, 1.0))
        assert d.weight == 3.0
        assert d.finite_atoms == [(0j, 2.0)]
        assert d.weight_at(INF) == 1.0

    @pytest.mark.parametrize("atoms", [((0, -1.0),), ((0, 1.0), (0, 2.0)), ((INF, 1.0), (INF, 1.0))])
    def test_invalid(self, atoms):
        with pytest.raises(ParameterError):
            WeightedDivisor(atoms)


class TestConformalRadius:
    def test_centered(self):
        assert conformal_radius_disc(0, 2.5, 0) == 2.5

    def test_off_center_matches_greens_asymptotics(self):
        c, r = 0.3 + 0.1j, 1.2
        rad = conformal_radius_disc(c, r, 0)
        assert rad == pytest.approx((r * r - abs(c) ** 2) / r, abs=1e-15)
        # G_D(z, 0) + log|z| -> log rad as z -> 0
        eps = 1e-7
        g = greens_disc((eps - c) / r, -c / r)
        assert g + math.log(eps) == pytest.approx(math.log(rad), abs=1e-6)

    def test_near_boundary(self):
        assert conformal_radius_disc(0, 1, 0.99) == pytest.approx(0.0199, abs=1e-15)

    def test_outside(self):
        with pytest.raises(DomainError):
            conformal_radius_disc(0, 1, 1.5)
