import cmath
import math

import numpy as np
import pytest

from hslab.curves import ESCAPE, hausdorff_curves
from hslab.errors import DegenerateError, ParameterError, SingularStartError
from hslab.kernels import INF, WeightedDivisor
from hslab.quad_diff import (QuadDiff, build_three_source, critical_graph, finite_critical_points,
                             level_drift, residue_sqrt, separatrix_directions, trace_vertical)


@pytest.fixture(scope="module")
def twosrc():
    return build_three_source(2, 1, 0)


@pytest.fixture(scope="module")
def twosrc_graph(twosrc):
    return critical_graph(twosrc, step=1e-3)


class TestBuild:
    def test_two_source_example(self, twosrc, rng):
        for z in rng.normal(size=20) + 1j * rng.normal(size=20):
            expected = (4 - 3 * z) / (4 * z**2 * (z - 1) ** 2)
            assert abs(twosrc.value(z) - expected) <= 1e-12 * abs(expected)

    def test_equal_weights_constant_numerator(self):
        qd = build_three_source(1, 1, 0)
        assert finite_critical_points(qd) == []
        z = 0.3 + 0.7j
        assert qd.value(z) == pytest.approx(1 / (4 * z**2 * (z - 1) ** 2), rel=1e-12)

    def test_slit_plane_degeneration(self):
        qd = build_three_source(1, 0, 0)
        z = -0.4 + 0.2j
        assert qd.value(z) == pytest.approx(1 / (4 * z**2 * (1 - z)), rel=1e-12)
        assert (1 + 0j, -1) in [(complex(p), m) for p, m in finite_critical_points(qd)]

    def test_rejects_nonpositive(self):
        with pytest.raises(ParameterError):
            build_three_source(0, 1, 0)

    def test_zero_numerator(self):
        with pytest.raises(DegenerateError):
            QuadDiff((0, 0))


class TestCriticalPoints:
    def test_two_source_zero(self, twosrc):
        pts = finite_critical_points(twosrc)
        assert len(pts) == 1
        z, m = pts[0]
        assert m == 1 and abs(z - 4 / 3) < 1e-12

    def test_three_equal_sources(self):
        pts = finite_critical_points(build_three_source(1, 1, 1))
        expected = sorted([(1 + 1j * math.sqrt(3)) / 2, (1 - 1j * math.sqrt(3)) / 2], key=lambda z: z.imag)
        got = sorted([z for z, _ in pts], key=lambda z: z.imag)
        for a, b in zip(got, expected):
            assert abs(a - b) < 1e-12
            assert abs(a * a - a + 1) < 1e-12


class TestResidues:
    @pytest.mark.parametrize("pole,value", [(0, 1.0), (1, 0.5)])
    def test_two_source(self, twosrc, pole, value):
        assert abs(residue_sqrt(twosrc, pole) - value) < 1e-10

    def test_infinity(self):
        assert abs(residue_sqrt(build_three_source(3, 4, 5), INF) - 2.5) < 1e-10

    def test_all_poles_random(self, rng):
        for _ in range(20):
            a0, a1, ai = rng.uniform(0.2, 3, 3)
            qd = build_three_source(a0, a1, ai)
            for p, w in qd.poles:
                assert abs(residue_sqrt(qd, p) - w / 2) < 1e-10

    def test_not_a_pole(self, twosrc):
        with pytest.raises(ParameterError):
            residue_sqrt(twosrc, 0.5)


class TestTrace:
    def test_real_ray(self, twosrc):
        c = trace_vertical(twosrc, 4 / 3, 1, 1e-3, 50)
        assert c.status == ESCAPE
        assert np.max(np.abs(c.points.imag)) < 1e-9
        assert np.all(c.points.real >= 4 / 3 - 1e-12)

    def test_loop_encircles_one(self, twosrc):
        up = [d for d in separatrix_directions(twosrc, 4 / 3, 1) if d.imag > 0.1][0]
        c = trace_vertical(twosrc, 4 / 3, up, 1e-3, 50)
        assert c.closed
        assert abs(c.winding_number(1.0)) == 1
        assert c.winding_number(0.0) == 0

    def test_equal_weights_bisector(self):
        qd = build_three_source(1, 1, 0)
        c = trace_vertical(qd, 0.5, 1j, 1e-3, 20)
        assert np.max(np.abs(c.points.real - 0.5)) < 1e-8

    def test_equipotential_is_trajectory(self):
        # for d = 1.0 in the disc, (dG)^2 = 1/(4 z^2); trajectories are circles
        qd = QuadDiff.from_disc_divisor(WeightedDivisor.of((0, 1.0)))
        c = trace_vertical(qd, 0.5, 1j, 1e-3, 10)
        assert c.closed
        assert np.max(np.abs(np.abs(c.points) - 0.5)) < 1e-6

    def test_level_fidelity(self, twosrc_graph, twosrc):
        for e in twosrc_graph.edges:
            drift = np.abs(level_drift(twosrc, e.curve))
            arclen = np.concatenate(([0], np.cumsum(np.abs(np.diff(e.curve.vertices)))))
            assert np.all(drift < 1e-6 * (1 + arclen))

    def test_singular_start(self, twosrc):
        with pytest.raises(SingularStartError):
            trace_vertical(twosrc, 0, 1j)


class TestCriticalGraph:
    def test_two_source(self, twosrc_graph):
        assert len(twosrc_graph.vertices) == 1
        assert len(twosrc_graph.edges) == 2
        ray = [e for e in twosrc_graph.edges if e.status == ESCAPE]
        loops = twosrc_graph.closed_loops()
        assert len(ray) == 1 and len(loops) == 1
        # the loop leaves the zero and comes back to it
        assert loops[0].start == loops[0].end == 0

    def test_separatrix_angles(self, twosrc, twosrc_graph):
        dirs = separatrix_directions(twosrc, 4 / 3, 1)
        angles = sorted(cmath.phase(d) % (2 * math.pi) for d in dirs)
        gaps = np.diff(angles + [angles[0] + 2 * math.pi])
        assert np.max(np.abs(gaps - 2 * math.pi / 3)) < 1e-6
        # the traced edges leave along those directions
        z0 = 4 / 3
        for e in twosrc_graph.edges:
            pts = e.curve.points
            for end in (pts[1], pts[-1]):
                t = (end - z0) / abs(end - z0)
                assert min(abs(t - d) for d in dirs) < 0.05

    def test_empty_graph(self):
        g = critical_graph(build_three_source(1, 1, 0))
        assert g.vertices == [] and g.edges == []

    def test_three_equal_sources(self):
        g = critical_graph(build_three_source(1, 1, 1), step=2e-3)
        assert len(g.vertices) == 2
        assert g.crossings() == []
        upper = [e.curve for e in g.edges if e.curve.points[len(e.curve) // 2].imag > 1e-3]
        lower = [e.curve for e in g.edges if e.curve.points[len(e.curve) // 2].imag < -1e-3]
        assert len(upper) == len(lower)
        for c in upper:
            best = min(hausdorff_curves(c.conjugate(), d) for d in lower)
            assert best < 1e-3
