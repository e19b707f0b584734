import math

import numpy as np
import pytest

from hslab.errors import AddressError, ParameterError
from hslab.greens_surface import (Assembly, GreensTypeSurface, HalfStrip, Pairing, SurfacePoint,
                                  assemble, from_weighted_tree, greens_value, layout, leaf_weights,
                                  slit_plane_chart, slit_plane_surface, strip, to_weighted_tree,
                                  validate_greens_type)


def random_tree(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return round(float(rng.uniform(0.1, 3)), 6)
    k = int(rng.integers(1, 4))
    return (round(float(rng.uniform(0.1, 2)), 6), [random_tree(rng, depth - 1) for _ in range(k)])


def all_paths(T, path=()):
    yield path, T
    if isinstance(T, Assembly):
        for i, c in enumerate(T.children):
            yield from all_paths(c, path + (i,))


class TestConstruction:
    def test_strip(self):
        assert strip(1).height == pytest.approx(math.pi)
        assert strip(2.5).boundary_length == pytest.approx(2.5 * math.pi)
        with pytest.raises(ParameterError):
            strip(0)

    def test_assemble(self):
        assert assemble(0.7, [strip(2), strip(1)]).height == pytest.approx(3 * math.pi)
        nested = assemble(1, [assemble(1, [strip(1)])])
        assert nested.height == pytest.approx(math.pi)
        with pytest.raises(ParameterError):
            assemble(1, [])

    def test_single_child_is_shifted_strip(self):
        T = assemble(1, [strip(1)])
        for x in (-0.5, -2.0):
            assert greens_value(T, SurfacePoint((0,), complex(x, 1))) == \
                pytest.approx(greens_value(strip(1), SurfacePoint((), complex(x - 1, 1))))

    def test_tree_shapes(self):
        assert from_weighted_tree(2.0) == strip(2.0)
        two_leaves = from_weighted_tree((1, [1, 1]))
        assert isinstance(two_leaves, Assembly) and all(isinstance(c, HalfStrip) for c in two_leaves.children)
        three = from_weighted_tree((1, [(0.5, [1, 2]), 0.5]))
        assert three.boundary_length == pytest.approx(3.5 * math.pi)
        with pytest.raises(ParameterError):
            from_weighted_tree((1, [-1]))


class TestGreensValue:
    def test_examples(self):
        assert greens_value(strip(1), SurfacePoint((), -3 + 0.5j)) == pytest.approx(6)
        assert greens_value(assemble(0.5, [strip(1)]), SurfacePoint((0,), -1 + 1j)) == pytest.approx(3)
        assert greens_value(assemble(0.5, [strip(1)]), SurfacePoint((), 0 + 2j)) == 0.0

    def test_bad_address(self):
        T = assemble(1, [strip(1)])
        with pytest.raises(AddressError):
            greens_value(T, SurfacePoint((3,), -1))
        with pytest.raises(AddressError):
            greens_value(T, SurfacePoint((0, 0), -1))
        with pytest.raises(AddressError):
            greens_value(T, SurfacePoint((), 0.5))

    def test_random_trees(self, rng):
        for _ in range(200):
            tree = random_tree(rng, 4)
            T = from_weighted_tree(tree)
            assert to_weighted_tree(T) == tree
            assert T.boundary_length == pytest.approx(math.pi * sum(leaf_weights(T)), rel=1e-12)
            for path, node in all_paths(T):
                y = 0.3 * node.height
                if isinstance(node, Assembly):
                    # seam between this rectangle and each child
                    for i, off in enumerate(node.child_offsets()):
                        yc = 0.5 * node.children[i].height
                        left = greens_value(T, SurfacePoint(path, complex(-node.rect_width, off + yc)))
                        right = greens_value(T, SurfacePoint(path + (i,), complex(0, yc)))
                        assert abs(left - right) < 1e-12
                # slope exactly 2 in -x
                g1 = greens_value(T, SurfacePoint(path, complex(-0.1, y)))
                g2 = greens_value(T, SurfacePoint(path, complex(-0.05, y)))
                assert g1 - g2 == pytest.approx(0.1, abs=1e-12)


class TestGreensType:
    def test_slit_plane(self):
        rep = validate_greens_type(slit_plane_surface())
        assert rep.valid, rep.issues

    def test_slit_plane_chart(self, rng):
        # the pairing y <-> pi - y glues points with the same image on the slit
        for y in rng.uniform(0.01, math.pi / 2, 20):
            a, b = slit_plane_chart(1j * y), slit_plane_chart(1j * (math.pi - y))
            assert abs(a - b) < 1e-9 * abs(a)
            assert abs(a.imag) < 1e-9 * abs(a) and a.real >= 1 - 1e-12
        # the Green's function with pole at 0 matches -2x
        for z in -rng.uniform(0.05, 3, 10) + 1j * rng.uniform(0.1, 3, 10):
            assert greens_value(strip(1), SurfacePoint((), z)) == pytest.approx(-math.log(abs(np.exp(2 * z))))

    def test_two_circles(self):
        q = Pairing(0, (0, math.pi), 1, (0, math.pi), complex(0, math.pi))
        assert validate_greens_type(GreensTypeSurface((strip(1), strip(1)), (q,))).valid

    def test_length_mismatch(self):
        q = Pairing(0, (0, math.pi), 1, (0, 2), complex(0, math.pi))
        rep = validate_greens_type(GreensTypeSurface((strip(1), strip(1)), (q,)))
        assert "LengthMismatch" in rep.kinds()

    def test_coverage_and_orientation(self):
        q = Pairing(0, (0, 1), 0, (2, 3), complex(0, 3))
        rep = validate_greens_type(GreensTypeSurface((strip(1),), (q,)))
        assert "CoverageGap" in rep.kinds()
        q = Pairing(0, (0, math.pi / 2), 0, (math.pi / 2, math.pi), complex(0, math.pi / 2), "plus")
        assert "Orientation" in validate_greens_type(GreensTypeSurface((strip(1),), (q,))).kinds()

    def test_non_involutive(self):
        q = Pairing(0, (0, math.pi), 1, (0, math.pi), complex(0, math.pi))
        bad = Pairing(1, (0, math.pi), 0, (0, math.pi), complex(0.0, 1.0))
        rep = validate_greens_type(GreensTypeSurface((strip(1), strip(1)), (q, bad)))
        assert "NonInvolutive" in rep.kinds()

    def test_json_round_trip(self):
        S = GreensTypeSurface(((1, [1, (0.5, [2])]), strip(4)),
                              (Pairing(0, (0, 4 * math.pi), 1, (0, 4 * math.pi), 4j * math.pi),))
        assert GreensTypeSurface.from_json(S.to_json()) == S

    def test_layout_covers_pieces(self):
        T = from_weighted_tree((1, [1, 2]))
        polys = layout(T, depth=-5)
        assert len(polys) == 3
        ys = [v.imag for _, verts in polys for v in verts]
        assert max(ys) == pytest.approx(3 * math.pi)
