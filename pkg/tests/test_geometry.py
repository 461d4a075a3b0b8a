import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from maxlab.errors import DomainError, InputError
from maxlab.geometry import (
    Ball,
    ConeFrame,
    ConvexPolytope,
    NormKind,
    Parallelepiped,
    PointPlus,
    ball_contains,
    bottom_point,
    chebyshev_center,
    diamond_slice_measure,
    minimal_parallelepiped,
    minimizing_point,
    shadow_contains,
    support_ball_polytope,
)


@st.composite
def interior_balls(draw, kind=None):
    d = draw(st.integers(min_value=1, max_value=4))
    center = draw(st.lists(st.floats(min_value=1.0, max_value=20.0), min_size=d, max_size=d))
    radius = draw(st.floats(min_value=0.05, max_value=min(center)))
    kind = kind or draw(st.sampled_from(list(NormKind)))
    return Ball.of(kind, center, radius)


class TestBallContains:
    def test_diamond_interior_point(self):
        assert ball_contains(Ball.of("L1", (2, 2), 1), (2.5, 2))

    def test_boundary_is_excluded(self):
        assert not ball_contains(Ball.of("L2", (3, 3), 1), (3, 4))

    def test_orthant_truncation(self):
        assert not ball_contains(Ball.of("Linf", (2, 2), 1), (2.5, -0.5))

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            ball_contains(Ball.of("L2", (3, 3), 1), (3, 3, 3))

    def test_invalid_center(self):
        with pytest.raises(DomainError):
            PointPlus((1.0, 0.0))

    def test_kind_aliases(self):
        assert NormKind.parse("diamond") is NormKind.L1
        assert NormKind.parse("cube") is NormKind.LINF
        with pytest.raises(InputError):
            NormKind.parse("L3")

    @settings(max_examples=30, deadline=None)
    @given(interior_balls(), st.integers(min_value=0, max_value=2**31 - 1))
    def test_monotone_in_radius(self, ball, seed):
        rng = np.random.default_rng(seed)
        c = ball.center.as_array()
        points = c + rng.uniform(-2 * ball.radius, 2 * ball.radius, size=(2000, ball.dim))
        bigger = Ball(ball.kind, ball.center, 1.5 * ball.radius)
        inside = ball.contains(points)
        assert np.all(bigger.contains(points[inside]))

    def test_norm_nesting(self):
        rng = np.random.default_rng(3)
        for d in (2, 3, 4):
            center = rng.uniform(2, 6, size=d)
            points = center + rng.uniform(-2.5, 2.5, size=(100_000, d))
            diamond = Ball.of("L1", center, 2.0).contains(points)
            euclid = Ball.of("L2", center, 2.0).contains(points)
            cube = Ball.of("Linf", center, 2.0).contains(points)
            assert np.all(euclid[diamond])
            assert np.all(cube[euclid])


class TestMinimizingPoint:
    @pytest.mark.parametrize(
        "kind, center, radius, expected",
        [
            ("Linf", (3, 3), 1.0, (2, 2)),
            ("L2", (3, 3), math.sqrt(2), (2, 2)),
            ("L1", (4, 4), 2.0, (3, 3)),
        ],
    )
    def test_formula_points(self, kind, center, radius, expected):
        np.testing.assert_allclose(minimizing_point(Ball.of(kind, center, radius)), expected, atol=1e-12)

    def test_ball_touching_boundary_is_rejected(self):
        with pytest.raises(DomainError):
            minimizing_point(Ball.of("Linf", (1, 3), 2))

    @pytest.mark.parametrize("kind", list(NormKind))
    def test_l1_norm_is_minimal(self, kind):
        rng = np.random.default_rng(11)
        ball = Ball.of(kind, (4.0, 5.0, 6.0), 2.5)
        z = minimizing_point(ball)
        points = ball.center.as_array() + rng.uniform(-2.5, 2.5, size=(30_000, 3))
        points = points[ball.contains(points)][:10_000]
        assert np.all(points.sum(axis=1) >= z.sum() - 1e-12)
        assert ball.kind is NormKind.L1 or np.isclose(
            np.linalg.norm(z - ball.center.as_array(), ord=ball.kind.order), ball.radius
        )


class TestConeFrame:
    def test_diagonal_goes_to_first_axis(self):
        np.testing.assert_allclose(ConeFrame(2).rotate([1, 1]), [math.sqrt(2), 0], atol=1e-12)
        np.testing.assert_allclose(ConeFrame(3).rotate(np.ones(3) / math.sqrt(3)), [1, 0, 0], atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_round_trip_and_distances(self, d):
        frame = ConeFrame(d)
        rng = np.random.default_rng(d)
        points = rng.normal(size=(1000, d)) * 10
        assert np.max(np.abs(frame.inverse(frame.rotate(points)) - points)) < 1e-12
        rotated = frame.rotate(points)
        np.testing.assert_allclose(
            np.linalg.norm(rotated[1:] - rotated[:-1], axis=1),
            np.linalg.norm(points[1:] - points[:-1], axis=1),
            rtol=1e-12,
        )
        assert np.linalg.det(frame.rotation) == pytest.approx(1.0)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_cone_is_image_of_orthant(self, d):
        frame = ConeFrame(d)
        rng = np.random.default_rng(5)
        points = rng.uniform(-1, 1, size=(5000, d))
        np.testing.assert_array_equal(frame.contains(frame.rotate(points)), np.all(points > 0, axis=1))

    @pytest.mark.parametrize("d, side", [(3, math.sqrt(6)), (4, math.sqrt(8))])
    def test_section_is_regular_simplex(self, d, side):
        vertices = ConeFrame(d).section_vertices(2.0)
        np.testing.assert_allclose(vertices[:, 0], 2.0, atol=1e-12)
        gaps = [np.linalg.norm(vertices[i] - vertices[j]) for i in range(d) for j in range(i + 1, d)]
        np.testing.assert_allclose(gaps, 2.0 * side, rtol=1e-10)


class TestBottomPoint:
    def test_free_minimum(self):
        np.testing.assert_allclose(bottom_point(ConeFrame(2), [4, 1], 1), [3, 1], atol=1e-12)

    def test_constrained_minimum_on_face(self):
        a = bottom_point(ConeFrame(2), [2, 1.8], 1)
        np.testing.assert_allclose(a, [1.2, 1.2], atol=1e-10)
        assert abs(np.linalg.norm(a - np.array([2, 1.8])) - 1) < 1e-10

    def test_center_outside_cone(self):
        with pytest.raises(DomainError):
            bottom_point(ConeFrame(2), [1, 2], 0.5)

    def test_lowest_over_samples_in_3d(self):
        frame = ConeFrame(3)
        m = frame.rotate([3.0, 1.0, 0.4])
        r = 1.0
        a = bottom_point(frame, m, r)
        assert np.linalg.norm(a - m) <= r + 1e-10
        assert frame.contains(a, closed=True, tol=1e-10)
        rng = np.random.default_rng(0)
        points = m + rng.uniform(-r, r, size=(50_000, 3))
        points = points[(np.linalg.norm(points - m, axis=1) < r) & frame.contains(points)]
        assert np.all(points[:, 0] >= a[0] - 1e-9)


class TestShadow:
    def test_ray_through_center(self):
        assert shadow_contains(Ball.of("L2", (3, 3), 1), (1, 0), (10, 3))

    def test_offset_beyond_radius(self):
        assert not shadow_contains(Ball.of("L2", (3, 3), 1), (1, 0), (10, 5))

    @pytest.mark.parametrize("kind", list(NormKind))
    def test_points_in_region(self, kind):
        assert shadow_contains(Ball.of(kind, (3, 3), 1), (1, 0), (3.2, 3.1))

    @pytest.mark.parametrize("kind", list(NormKind))
    def test_exact_agrees_with_search(self, kind):
        ball = Ball.of(kind, (3, 4), 1.5)
        direction = np.array([0.6, 0.8])
        rng = np.random.default_rng(1)

        class Wrapped:
            def contains(self, points):
                return ball.contains(points)

            def bounding_box(self):
                return ball.bounding_box()

        for p in rng.uniform(0, 10, size=(200, 2)):
            exact = shadow_contains(ball, direction, p)
            searched = shadow_contains(Wrapped(), direction, p, search_points=20_000)
            # the grid search may miss only very short chords
            assert searched <= exact

    def test_direction_must_be_unit(self):
        with pytest.raises(InputError):
            shadow_contains(Ball.of("L2", (3, 3), 1), (2, 0), (10, 3))


class TestDiamondSlice:
    def test_planar_slice(self):
        assert diamond_slice_measure([3, 3], 2, 5) == pytest.approx(2 * math.sqrt(2), rel=1e-10)

    def test_outside_range(self):
        assert diamond_slice_measure([3, 3], 2, 4) == 0.0
        assert diamond_slice_measure([3, 3], 2, 9) == 0.0

    @pytest.mark.parametrize("d", [2, 3])
    def test_slices_integrate_to_volume(self, d):
        z = np.full(d, 3.0)
        r = 1.0
        z0 = z.sum()
        total, _ = quad(lambda t: diamond_slice_measure(z, r, t), z0 - r, z0 + r, epsrel=1e-10, limit=200)
        expected = math.sqrt(d) * (2 * r) ** d / math.factorial(d)
        assert total == pytest.approx(expected, rel=1e-8)

    def test_truncated_slice_is_smaller(self):
        full = diamond_slice_measure([3, 3], 2, 5)
        truncated = diamond_slice_measure([1, 3], 2, 3)
        assert 0 < truncated < full


class TestPolytopes:
    square = ConvexPolytope.from_vertices([[0, 0], [1, 0], [0, 1], [1, 1]])

    def test_chebyshev_center_of_square(self):
        A = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
        b = np.array([1, 0, 1, 0], dtype=float)
        center, radius = chebyshev_center(A, b)
        np.testing.assert_allclose(center, [0.5, 0.5], atol=1e-9)
        assert radius == pytest.approx(0.5)

    def test_halfspaces_and_vertices_agree(self):
        A = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
        poly = ConvexPolytope.from_halfspaces(A, np.array([1, 0, 1, 0], dtype=float))
        assert poly.volume == pytest.approx(1.0)
        assert ConvexPolytope.from_halfspaces(A, np.array([-1, 0, 1, 0], dtype=float)) is None

    def test_support_function(self):
        e1 = np.array([1.0, 0.0])
        assert support_ball_polytope([0.5, 0.5], 10, self.square, e1) == pytest.approx(1.0)
        assert support_ball_polytope([0.5, 0.5], 0.2, self.square, e1) == pytest.approx(0.7)
        assert support_ball_polytope([5, 5], 1, self.square, e1) == -math.inf

    def test_support_through_edge_crossing(self):
        # unit disc around the corner (1, 1): the highest x on the square is 1
        assert support_ball_polytope([1, 1], 1, self.square, [1, 0]) == pytest.approx(1.0)
        # and the lowest x is where the circle leaves the edge y = 1
        assert -support_ball_polytope([1, 1], 1, self.square, [-1, 0]) == pytest.approx(0.0)

    def test_support_in_3d(self):
        cube = ConvexPolytope.from_vertices(np.array(np.meshgrid([0, 1], [0, 1], [0, 1])).reshape(3, -1).T)
        assert cube.volume == pytest.approx(1.0)
        value = support_ball_polytope([0.5, 0.5, -0.5], 0.8, cube, [0, 0, 1])
        assert value == pytest.approx(0.3)

    def test_minimal_parallelepiped(self):
        box = minimal_parallelepiped(np.eye(2), [0.5, 0.5], 10, self.square)
        np.testing.assert_allclose(box.side_lengths, [1, 1], atol=1e-9)
        assert box.volume == pytest.approx(1.0)

    def test_parallelepiped_contains(self):
        p = Parallelepiped([0, 0], [[2, 0], [1, 1]])
        assert p.volume == pytest.approx(2.0)
        assert p.contains([1.5, 0.5])
        assert not p.contains([0.1, 0.9])
        inner = Parallelepiped([0.5, 0.1], [[1, 0], [0.5, 0.5]])
        assert p.contains_parallelepiped(inner)

    def test_degenerate_parallelepiped(self):
        with pytest.raises(InputError):
            Parallelepiped([0, 0], [[1, 1], [2, 2]])
