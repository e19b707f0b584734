import math

import numpy as np
import pytest
from scipy import ndimage

from hslab.curves import circle_curve
from hslab.errors import DomainError, PoleError, UnsupportedDomainError
from hslab.kernels import INF, WeightedDivisor, conformal_radius_disc, greens_disc
from hslab.stationary import (Circle, FourDropletSpec, LevelPotential, MobiusDomain, WeldingMap,
                              area_perimeter_variation, classify_four_droplet, four_droplet_curves,
                              hadamard_gradient_quadrature, potential_value, reduced_energy_circle_pair,
                              reduced_energy_general, trace_level, welding_evaluate, welding_lift)

D0 = WeightedDivisor.of((0, 1.0))
DINF = WeightedDivisor.of((INF, 1.0))


def random_spec(rng):
    x1, x2 = rng.uniform(-0.95, 0.95, 2)
    return FourDropletSpec(x1, x2, rng.uniform(0.5, 8), rng.uniform(0.5, 8))


class TestPotential:
    def test_log_modulus(self):
        R = LevelPotential(neg=D0)
        assert potential_value(R, 0.5) == pytest.approx(math.log(0.5), abs=1e-15)

    def test_four_droplet_vanishes_on_circle(self, rng):
        for _ in range(20):
            spec = random_spec(rng)
            z = np.exp(2j * np.pi * rng.random(100))
            assert np.max(np.abs(spec.value(z))) < 1e-12
            assert np.max(np.abs(spec.potential().values(z))) < 1e-11

    def test_single_kernel(self):
        assert FourDropletSpec.R_x(0.5, 0.25) == pytest.approx(math.log(3.5), abs=1e-15)

    def test_pole(self):
        with pytest.raises(PoleError):
            potential_value(LevelPotential(neg=D0), 0)


class TestTraceLevel:
    def test_circle(self):
        c = trace_level(LevelPotential(neg=D0), math.log(0.5), 0.4 + 0.1j)
        assert c.closed
        assert np.max(np.abs(np.abs(c.points) - 0.5)) < 1e-8
        assert c.meta["jordan"]

    def test_polynomial_lemniscate(self):
        roots = np.exp(2j * np.pi * np.arange(3) / 3)
        R = LevelPotential(neg=WeightedDivisor(tuple((r, 1 / 3) for r in roots)))
        level = math.log(2) / 3
        c = trace_level(R, level, 3 ** (1 / 3))
        assert c.closed and c.meta["jordan"]
        assert np.max(np.abs(np.abs(c.points**3 - 1) - 2)) < 1e-7
        for r in roots:
            assert abs(c.winding_number(r)) == 1

    def test_four_droplet_topology(self):
        spec = FourDropletSpec(-0.9, 0.9, 6, 1)
        curves = four_droplet_curves(spec)
        assert len(curves["inner"]) == 1
        arc = curves["inner"][0]
        assert not arc.closed
        assert abs(abs(arc.points[0]) - 1) < 1e-6 and abs(abs(arc.points[-1]) - 1) < 1e-6
        # independent oracle: sign scan on a grid gives one D1 and one D2 component
        x = np.linspace(-1, 1, 801)
        Z = x[None, :] + 1j * x[:, None]
        inside = np.abs(Z) < 0.999
        with np.errstate(divide="ignore", invalid="ignore"):
            val = spec.value(Z)
        for mask in (inside & (val > 0), inside & (val < 0)):
            _, n = ndimage.label(mask)
            assert n == 1

    def test_classify(self, rng):
        spec = FourDropletSpec(-0.5, 0.5, 6, 1)
        assert classify_four_droplet(spec, 0) == "D1"
        assert float(spec.value(0)) == pytest.approx(5 * math.log(2), abs=1e-14)
        assert classify_four_droplet(spec, -0.5 + 1e-4) == "D1"
        with pytest.raises(PoleError):
            classify_four_droplet(spec, 2.0)
        for z in 0.98 * np.sqrt(rng.random(500)) * np.exp(2j * np.pi * rng.random(500)):
            lab = classify_four_droplet(spec, z)
            inv = classify_four_droplet(spec, 1 / z)
            assert (lab == "D1") == (inv == "D3")
            assert (lab == "D2") == (inv == "D4")

    def test_symmetries(self, rng):
        for _ in range(20):
            spec = random_spec(rng)
            z = (rng.normal(size=1000) + 1j * rng.normal(size=1000)) * 2
            assert np.max(np.abs(spec.value(1 / z) + spec.value(z))) < 1e-12
            assert np.max(np.abs(spec.value(z.conjugate()) - spec.value(z))) < 1e-12


class TestEnergy:
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_centered_circle(self, r):
        assert reduced_energy_circle_pair(0, r) == 0.0

    def test_off_center(self):
        # M_D(0) = log conformal radius of the disc at 0, M_{D*}(inf) = -log r
        c, r = 0.5, 1.0
        oracle = math.log(conformal_radius_disc(c, r, 0)) - math.log(r)
        assert abs(reduced_energy_circle_pair(c, r) - oracle) < 1e-12
        assert abs(reduced_energy_circle_pair(c, r) - math.log(0.75)) < 1e-10

    def test_nonpositive(self, rng):
        for _ in range(100):
            r = rng.uniform(0.1, 3)
            c = r * rng.uniform(0, 0.99) * np.exp(2j * np.pi * rng.random())
            assert reduced_energy_circle_pair(c, r) <= 0
        assert reduced_energy_circle_pair(0.5, 1) < -1e-6

    def test_zero_outside(self):
        with pytest.raises(DomainError):
            reduced_energy_circle_pair(2, 1)

    def test_general(self):
        assert reduced_energy_general(MobiusDomain.unit_disc(), D0) == 0.0
        d = WeightedDivisor.of((0.3, 1.0), (-0.3, 1.0))
        expected = (2 * greens_disc(0.3, -0.3) + math.log(conformal_radius_disc(0, 1, 0.3))
                    + math.log(conformal_radius_disc(0, 1, -0.3)))
        assert reduced_energy_general(MobiusDomain.unit_disc(), d) == pytest.approx(expected, abs=1e-13)
        assert reduced_energy_general(MobiusDomain.disc(0, 2), D0) == pytest.approx(math.log(2), abs=1e-14)

    def test_exterior_matches_pair(self):
        c, r = 0.3 + 0.2j, 1.5
        inner = reduced_energy_general(MobiusDomain.disc(c, r), D0)
        outer = reduced_energy_general(MobiusDomain.disc_exterior(c, r), DINF)
        assert inner + outer == pytest.approx(reduced_energy_circle_pair(c, r), abs=1e-13)

    def test_unsupported(self):
        with pytest.raises(UnsupportedDomainError):
            reduced_energy_general("square", D0)


class TestVariations:
    def test_centered_stationary(self):
        for r in (0.5, 1.0, 2.0):
            assert abs(hadamard_gradient_quadrature(Circle(0, r), D0, DINF)) < 1e-10

    def test_off_center_positive(self):
        assert hadamard_gradient_quadrature(Circle(0, 1), WeightedDivisor.of((0.4, 1.0)), DINF) > 1e-3

    def test_polyline_circle(self):
        g = hadamard_gradient_quadrature(circle_curve(0.2, 1.3), WeightedDivisor.of((0.3, 1.0)), DINF)
        ref = hadamard_gradient_quadrature(Circle(0.2, 1.3), WeightedDivisor.of((0.3, 1.0)), DINF)
        assert g == pytest.approx(ref, rel=1e-8)

    def test_not_a_circle(self):
        square = circle_curve(0, 1, 4)
        with pytest.raises(UnsupportedDomainError):
            hadamard_gradient_quadrature(square.mapped(lambda z: z * (1 + 0.3 * z.real)), D0, DINF)

    def test_area(self):
        area, perim = area_perimeter_variation(Circle(0, 1), D0, DINF)
        assert abs(area) < 1e-12 and abs(perim) < 1e-12
        area, _ = area_perimeter_variation(Circle(0, 1), WeightedDivisor.of((0, 2.0)), DINF)
        assert area == pytest.approx(2 * math.pi, rel=1e-12)


class TestWelding:
    theta = np.linspace(0, 2 * np.pi, 4096, endpoint=False)

    def test_identity(self):
        h = welding_evaluate(WeldingMap(((0, 1.0),)), self.theta)
        assert np.max(np.abs(h - np.exp(1j * self.theta))) < 1e-14

    def test_mobius(self):
        z = np.exp(1j * self.theta)
        h = welding_evaluate(WeldingMap(((0.5, 1.0),)), self.theta)
        assert np.max(np.abs(h - (z - 0.5) / (1 - 0.5 * z))) < 1e-13

    def test_monotone(self):
        lift = welding_lift(WeldingMap(((0.3, 0.5), (-0.3, 0.5))), self.theta)
        assert np.all(np.diff(lift) > 0)
        assert np.max(np.abs(np.abs(welding_evaluate(WeldingMap(((0.3, 0.5), (-0.3, 0.5))), self.theta)) - 1)) < 1e-14

    def test_derivative_is_poisson_sum(self, rng):
        anchors = ((0.3 + 0.2j, 0.25), (-0.5, 0.5), (0.1j, 0.25))
        w = WeldingMap(anchors)
        h = 1e-5
        t = rng.uniform(0, 2 * np.pi, 50)
        fd = (welding_lift(w, t + h) - welding_lift(w, t - h)) / (2 * h)
        z = np.exp(1j * t)
        P = sum(a * (1 - abs(x) ** 2) / np.abs(z - x) ** 2 for x, a in anchors)
        assert np.max(np.abs(fd - P) / P) < 1e-4
