import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maxlab.errors import CapabilityError, ClassificationError, DomainError, InputError
from maxlab.geometry import NormKind
from maxlab.oracle import (
    BallConeConfig,
    ConeCase,
    DiamondConfig,
    classify,
    clipped_box_volume,
    cover_check,
    cross_section_checks,
    envelope_check,
    exit_length,
    positive_root,
    random_ball_config,
    random_diamond_config,
    random_level,
    rectangle_lemma_check,
    rectangle_sweep,
    run_instances,
    slice_cover,
    slicing_decay,
    slicing_fit,
    sophi_check,
    sophi_sweep,
    summarize,
    xi_of_h,
)
from maxlab.oracle.cover import _CoverState, _envelope_check, tetra_axes, tetra_edges
from maxlab.oracle.roots import KIND_DIMS, h_limit, p_closed


@pytest.fixture
def planar_cfg():
    return BallConeConfig((7.0, 6.0), 5.0)


@st.composite
def chords(draw):
    """A ball, a point strictly inside it and a unit direction."""
    seed = draw(st.integers(min_value=0, max_value=2 ** 31 - 1))
    d = draw(st.integers(min_value=2, max_value=4))
    rng = np.random.default_rng(seed)
    center = rng.uniform(-5, 5, size=d)
    radius = rng.uniform(0.5, 10.0)
    offset = rng.normal(size=d)
    origin = center + offset / np.linalg.norm(offset) * radius * rng.uniform(0.0, 0.95)
    direction = rng.normal(size=d)
    return center, radius, origin, direction / np.linalg.norm(direction)


class TestConfigs:
    def test_planar_example(self, planar_cfg):
        np.testing.assert_allclose(planar_cfg.a, [3.0, 3.0], atol=1e-10)
        assert planar_cfg.delta == pytest.approx(4.0)
        assert planar_cfg.R == pytest.approx(3.0)
        assert planar_cfg.case is ConeCase.VERTEX
        assert np.linalg.norm(planar_cfg.a - planar_cfg.center) == pytest.approx(5.0, abs=1e-10)

    @pytest.mark.parametrize(
        "d, case",
        [(2, ConeCase.VERTEX), (3, ConeCase.VERTEX), (3, ConeCase.SIDE), (4, ConeCase.VERTEX), (4, ConeCase.SIDE), (4, ConeCase.EDGE)],
    )
    def test_generated_case_matches(self, d, case):
        rng = np.random.default_rng(11)
        for _ in range(5):
            cfg = random_ball_config(d, case, rng)
            assert classify(cfg) is case
            assert cfg.bottom > 2
            assert np.linalg.norm(cfg.a - cfg.center) == pytest.approx(cfg.r, rel=1e-10)
            assert cfg.r / math.sqrt(d) - 1e-9 <= cfg.delta <= cfg.r + 1e-9

    def test_no_side_case_in_the_plane(self):
        with pytest.raises(InputError):
            random_ball_config(2, "side")
        with pytest.raises(InputError):
            ConeCase.parse("corner")

    def test_invalid_configurations(self):
        with pytest.raises(DomainError):
            BallConeConfig((1.0, 2.0), 5.0)
        with pytest.raises(DomainError):
            BallConeConfig((7.0, 6.0), 1.0)

    def test_vertex_index_needs_vertex_case(self):
        cfg = random_ball_config(3, ConeCase.SIDE, np.random.default_rng(2))
        with pytest.raises(ClassificationError):
            cfg.vertex_index

    def test_diamond_renumbering(self):
        cfg = DiamondConfig((5.0, 1.0, 2.0), 3.0, (4.5, 1.0, 2.0))
        assert cfg.z == (1.0, 2.0, 5.0)
        assert cfg.xi == (1.0, 2.0, 4.5)
        assert cfg.perm == (1, 2, 0)
        assert cfg.b == pytest.approx(5.0)
        assert cfg.ball.kind is NormKind.L1

    def test_diamond_rejects_low_bottom(self):
        with pytest.raises(DomainError):
            DiamondConfig((2.0, 2.0), 3.0, (2.0, 2.0))
        with pytest.raises(DomainError):
            DiamondConfig((5.0, 5.0), 3.0, (9.0, 9.0))

    def test_random_diamond_and_level(self):
        rng = np.random.default_rng(4)
        for d in (2, 3, 4):
            cfg = random_diamond_config(d, rng)
            t = random_level(cfg, rng)
            assert cfg.b > 2
            assert cfg.b < t < cfg.b + 2 * cfg.r


class TestRoots:
    def test_positive_root(self):
        assert positive_root(3.0, 7.0) == pytest.approx(1.0)
        assert positive_root(-3.0, 7.0) == pytest.approx(7.0)
        with pytest.raises(DomainError):
            positive_root(1.0, 0.0)

    def test_xi_example(self, planar_cfg):
        sample = xi_of_h(planar_cfg, 1.0)
        assert sample.closed_form == pytest.approx(1.0, abs=1e-10)
        assert sample.residual < 1e-10
        assert sample.envelope == pytest.approx(5.0 / (3.0 + math.sqrt(5.0)))

    def test_xi_vanishes_at_the_bottom(self, planar_cfg):
        assert xi_of_h(planar_cfg, 1e-8).closed_form < 1e-7

    def test_xi_range(self, planar_cfg):
        with pytest.raises(DomainError):
            xi_of_h(planar_cfg, 0.0)
        with pytest.raises(DomainError):
            xi_of_h(planar_cfg, 4.0)

    def test_exit_length_examples(self):
        assert exit_length([0.0, 0.0], 4.0, [0.0, 3.0], [0.0, 1.0]) == pytest.approx(1.0)
        assert exit_length([1.0, 2.0, 3.0], 2.5, [1.0, 2.0, 3.0], [0.0, 0.0, 1.0]) == pytest.approx(2.5)
        assert p_closed(3.0, 1.0, 4.0, 1.0) == pytest.approx(1.0)

    def test_exit_length_errors(self):
        with pytest.raises(DomainError):
            exit_length([0.0, 0.0], 1.0, [2.0, 0.0], [1.0, 0.0])
        with pytest.raises(InputError):
            exit_length([0.0, 0.0], 1.0, [0.0, 0.0], [1.0, 1.0])
        with pytest.raises(InputError):
            exit_length([0.0, 0.0], 1.0, [0.0, 0.0, 0.0], [1.0, 0.0])

    @given(chords())
    @settings(max_examples=50, deadline=None)
    def test_chord_identity(self, chord):
        center, radius, origin, direction = chord
        forward = exit_length(center, radius, origin, direction)
        backward = exit_length(center, radius, origin, -direction)
        w = origin - center
        distance_sq = float(w @ w) - float(w @ direction) ** 2
        assert forward + backward == pytest.approx(2 * math.sqrt(radius ** 2 - distance_sq), rel=1e-9)
        assert np.linalg.norm(origin + forward * direction - center) == pytest.approx(radius, rel=1e-9)

    @pytest.mark.parametrize("kind", ["xi", "p", "q", "p_slanted", "p_i", "v_i"])
    def test_closed_forms_agree_with_geometry(self, kind):
        rng = np.random.default_rng(17)
        for _ in range(5):
            cfg = random_ball_config(KIND_DIMS[kind], ConeCase.VERTEX, rng)
            h = h_limit(kind, cfg) * rng.uniform(0.05, 0.95)
            report = envelope_check(kind, cfg, h)
            assert report.residual_max < 1e-10
            assert report.violations == 0
            assert report.passed

    def test_roots_need_vertex_case(self):
        cfg = random_ball_config(3, ConeCase.SIDE, np.random.default_rng(3))
        with pytest.raises(DomainError):
            envelope_check("p", cfg, 0.1)

    def test_roots_check_dimension(self, planar_cfg):
        with pytest.raises(DomainError):
            envelope_check("p", planar_cfg, 0.5)
        with pytest.raises(InputError):
            envelope_check("w", planar_cfg, 0.5)


class TestRectangleLemma:
    def test_clipped_triangle(self):
        assert clipped_box_volume([1.0, 1.5], 1.5) == pytest.approx(1.0)
        report = rectangle_lemma_check([1.0, 1.5], 1.5, seed=1)
        assert report.details["E_volume"] == pytest.approx(1.0)
        assert report.details["rectangle_volume"] == pytest.approx(1.5)
        assert report.details["ratio"] == pytest.approx(2.0 / 3.0)
        assert report.passed

    def test_inactive_constraint(self):
        report = rectangle_lemma_check([1.0, 2.0, 0.5], 4.0, seed=2)
        assert report.details["ratio"] == pytest.approx(1.0)
        assert report.passed

    def test_monte_carlo_agrees_in_three_dimensions(self):
        report = rectangle_lemma_check([1.0, 2.0, 3.0], 2.5, seed=3)
        assert abs(report.details["mc_z"]) < 5
        assert report.details["ratio"] >= 3 ** -3

    def test_dimension_limit(self):
        with pytest.raises(DomainError):
            rectangle_lemma_check([1.0, 1.0, 1.0, 1.0], 2.0)

    def test_sweep(self):
        summary = summarize("rectangle-lemma", rectangle_sweep(instances=40, seed=5))
        assert summary.all_passed
        assert summary.envelope_min >= 3 ** -3


class TestSophi:
    def test_planar_example(self):
        cfg = DiamondConfig((5.0, 5.0), 3.0, (4.0, 4.0))
        cover = slice_cover(cfg, 8.0)
        assert cover.branch == "paral"
        np.testing.assert_allclose([cover.lo[0], cover.hi[0]], [2.5, 5.5])
        report = sophi_check(cfg, 8.0, seed=1, samples=20000)
        assert report.violations == 0
        assert report.envelope_min > 0

    def test_near_the_bottom(self):
        cfg = DiamondConfig((5.0, 5.0), 3.0, (4.0, 4.0))
        t = cfg.b + 1e-6
        cover = slice_cover(cfg, t)
        assert np.all(cover.sides > 0)
        xi_t = np.array(cfg.xi) + (t - cfg.xi0) / cfg.d
        assert cover.contains(xi_t[None, :-1])[0]
        assert sophi_check(cfg, t, seed=2, samples=5000).violations == 0

    def test_level_out_of_range(self):
        cfg = DiamondConfig((5.0, 5.0), 3.0, (4.0, 4.0))
        with pytest.raises(DomainError):
            slice_cover(cfg, 7.0)
        with pytest.raises(DomainError):
            slice_cover(cfg, 13.5)

    def test_edges_are_differences_of_axes(self):
        cfg = DiamondConfig((3.0, 4.0, 5.0), 2.0, (3.0, 4.0, 4.5))
        edges = slice_cover(cfg, cfg.b + 1.0).edges()
        np.testing.assert_allclose(edges.sum(axis=1), 0.0, atol=1e-12)
        assert np.all(edges[:, -1] < 0)
        assert np.count_nonzero(edges[0]) == 2

    @pytest.mark.parametrize("d", [2, 3])
    def test_sweep_has_no_violations(self, d):
        reports = sophi_sweep(d, instances=6, seed=d, samples=4000)
        assert sum(r.violations for r in reports) == 0
        assert {r.details["branch"] for r in reports} <= {"paral", "addit"}


class TestCover:
    def test_envelope_frame_flags_points_behind_the_vertex(self):
        state = _CoverState()
        points = np.array([[0.5, 0.25], [0.2, 0.1], [-0.1, 0.2]])
        scale = _envelope_check(np.eye(2), np.zeros(2), np.array([1.0, 0.5]), points, state)
        assert scale == pytest.approx(0.5)
        assert state.violations == 1
        np.testing.assert_allclose(state.points[0], [-0.1, 0.2])

    def test_envelope_frame_with_no_points(self):
        state = _CoverState()
        assert _envelope_check(np.eye(2), np.zeros(2), np.ones(2), np.zeros((0, 2)), state) == 0.0
        assert state.violations == 0

    def test_cross_sections(self):
        report = cross_section_checks()
        assert report.residual_max < 1e-10
        assert report.passed

    def test_tetrahedron_edges(self):
        axis = np.array([0.2, -0.4, 0.8])
        axis /= np.linalg.norm(axis)
        edges = tetra_edges(axis)
        np.testing.assert_allclose(edges @ edges.T, 0.5 + 0.5 * np.eye(3), atol=1e-12)
        np.testing.assert_allclose(edges @ axis, math.sqrt(2.0 / 3.0), atol=1e-12)

    def test_tetrahedron_axes_stay_near_the_cone(self):
        cfg = random_ball_config(4, ConeCase.EDGE, np.random.default_rng(8))
        normals = cfg.inward_normals
        pole = normals.sum(axis=0) / np.linalg.norm(normals.sum(axis=0))
        axes = tetra_axes(pole, normals)
        assert len(axes) > 0
        assert np.all(np.min(axes @ normals.T, axis=1) > -1.0 / 3.0)
        assert any(np.allclose(u, pole) for u in axes)

    @pytest.mark.parametrize("case", [ConeCase.VERTEX, ConeCase.SIDE])
    def test_three_dimensional_cover(self, case):
        cfg = random_ball_config(3, case, np.random.default_rng(21))
        report = cover_check(cfg, seed=1, samples=4000, steps=6)
        assert report.violations == 0
        assert report.details["monotone_failures"] == 0
        assert report.lemma == "cover-d3"
        if case is ConeCase.SIDE:
            assert report.details["envelope_scale"] is None

    @pytest.mark.parametrize("case", [ConeCase.VERTEX, ConeCase.SIDE, ConeCase.EDGE])
    def test_four_dimensional_cover(self, case):
        cfg = random_ball_config(4, case, np.random.default_rng(22))
        report = cover_check(cfg, seed=1, samples=2000, steps=3)
        assert report.violations == 0
        assert report.details["monotone_failures"] == 0
        if case is ConeCase.VERTEX:
            assert report.details["star_checks"] >= 1
        else:
            assert report.details["min_max_edge_angle"] >= math.pi / 4 - 1e-9

    def test_plane_has_no_cover(self, planar_cfg):
        with pytest.raises(CapabilityError):
            cover_check(planar_cfg)

    def test_height_range(self):
        cfg = random_ball_config(4, ConeCase.VERTEX, np.random.default_rng(5))
        with pytest.raises(DomainError):
            cover_check(cfg, h=cfg.r)


class TestSlicing:
    def test_empty_slice_gives_zero(self):
        assert slicing_decay(2.0, "L1", 5, 1, seed=1, side=2.0) == 0.0

    def test_argument_checks(self):
        with pytest.raises(DomainError):
            slicing_decay(1.0, "L2", 2, 3)
        with pytest.raises(DomainError):
            slicing_decay(2.0, "Linf", 2, 3)
        with pytest.raises(DomainError):
            slicing_decay(2.0, "L2", 0, 3)
        with pytest.raises(DomainError):
            slicing_fit(2.0, "L2", i0=3, max_gap=4)

    def test_same_slice_ratio_is_finite(self):
        ratio = slicing_decay(2.0, "L2", 3, 3, seed=2, side=8.0)
        assert 0 < ratio < math.inf

    @pytest.mark.parametrize("kind", ["L1", "L2"])
    def test_decay_between_slices(self, kind):
        fit = slicing_fit(2.0, kind, i0=4, max_gap=3, samples=3, seed=7, spacing=0.5, side=10.0)
        assert fit.delta >= 0.2
        assert fit.log_ratios[-1] < fit.log_ratios[0]
        report = fit.to_report(threshold=0.2)
        assert report.lemma == f"slicing:{kind}"
        assert report.envelope_min > 0


class TestRunInstances:
    def test_threads_do_not_change_results(self):
        one = rectangle_sweep(instances=12, seed=9, threads=1)
        four = rectangle_sweep(instances=12, seed=9, threads=4)
        assert [r.config for r in one] == [r.config for r in four]

    def test_instance_order_and_seeding(self):
        draws = run_instances(lambda rng: float(rng.random()), 5, seed=3)
        assert draws == run_instances(lambda rng: float(rng.random()), 5, seed=3)
        assert len(set(draws)) == 5
