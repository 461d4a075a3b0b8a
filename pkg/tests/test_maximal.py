import math

import numpy as np
import pytest

from maxlab.errors import CapabilityError, DomainError, InputError
from maxlab.geometry import Ball
from maxlab.maximal import (
    CandidatePolicy,
    GridFunction,
    average_over_ball,
    centered_max_op_grid,
    even_extension,
    load_grid,
    log_lp_power,
    max_op_grid,
    norms_and_weak,
    save_grid,
    strong_max_grid,
    strong_max_upper,
)

KINDS = ["Linf", "L1", "L2"]
POLICY = CandidatePolicy(stride=1, ladder_ratio=2 ** 0.25)


def random_grid(seed, dims=(12, 12), spacing=0.5, sparsity=0.7):
    rng = np.random.default_rng(seed)
    values = rng.random(dims) * (rng.random(dims) > sparsity)
    return GridFunction((0.0,) * len(dims), spacing, values)


def leq(a, b, rel=1e-9):
    return np.all(a <= b * (1 + rel) + 1e-300)


class TestGridFunction:
    def test_rejects_negative_values(self):
        with pytest.raises(InputError):
            GridFunction((0.0, 0.0), 1.0, -np.ones((2, 2)))

    def test_centers_and_measure(self):
        g = GridFunction.constant(1.0, (0.0, 0.0), 0.5, (2, 3))
        np.testing.assert_allclose(g.axis_centers(1), [0.25, 0.75, 1.25])
        assert g.log_cell_measure()[0, 0] == pytest.approx(-0.5 + 2 * math.log(0.5))

    def test_save_and_load(self, tmp_path):
        g = random_grid(0, dims=(3, 4))
        save_grid(g, tmp_path / "f")
        loaded = load_grid(tmp_path / "f")
        assert loaded.same_geometry(g)
        np.testing.assert_array_equal(loaded.values, g.values)

    def test_policy_validation(self):
        with pytest.raises(InputError):
            CandidatePolicy(ladder_ratio=2.5)
        with pytest.raises(InputError):
            CandidatePolicy(stride=0)
        with pytest.raises(DomainError):
            CandidatePolicy(r_min=0.1).radii(random_grid(0), "Linf")

    def test_ladder_includes_extra_radii(self):
        radii = CandidatePolicy(extra_radii=(2.0,)).radii(random_grid(0), "Linf")
        assert 2.0 in radii
        assert radii[0] == pytest.approx(0.5)
        assert np.all(np.diff(radii) > 0)


class TestMaximalOperator:
    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("dims", [(9,), (10, 10), (5, 6, 4)])
    def test_constants_are_fixed(self, kind, dims):
        f = GridFunction.constant(1.0, (0.0,) * len(dims), 0.5, dims)
        assert np.all(max_op_grid(f, kind, POLICY).values == 1.0)
        assert np.all(centered_max_op_grid(f, kind, POLICY).values == 1.0)

    def test_four_dimensions_are_refused(self):
        with pytest.raises(CapabilityError):
            max_op_grid(GridFunction.constant(1.0, (0.0,) * 4, 1.0, (2, 2, 2, 2)), "Linf")

    @pytest.mark.parametrize("kind", KINDS)
    def test_monotone_in_f(self, kind):
        f = random_grid(1)
        g = f.with_values(f.values + random_grid(2).values)
        assert leq(max_op_grid(f, kind, POLICY).values, max_op_grid(g, kind, POLICY).values)

    @pytest.mark.parametrize("kind", KINDS)
    def test_homogeneous(self, kind):
        f = random_grid(3)
        scaled = max_op_grid(f.with_values(3.0 * f.values), kind, POLICY).values
        np.testing.assert_allclose(scaled, 3.0 * max_op_grid(f, kind, POLICY).values, rtol=1e-9, atol=0)

    @pytest.mark.parametrize("kind", KINDS)
    def test_bounded_by_sup(self, kind):
        f = random_grid(4)
        assert leq(max_op_grid(f, kind, POLICY).values, np.full(f.dims, f.values.max()))

    @pytest.mark.parametrize("kind", KINDS)
    def test_centered_is_smaller(self, kind):
        f = random_grid(5)
        assert leq(centered_max_op_grid(f, kind, POLICY).values, max_op_grid(f, kind, POLICY).values)

    @pytest.mark.parametrize("kind", KINDS)
    def test_permutation_equivariance(self, kind):
        f = random_grid(6)
        transposed = max_op_grid(f.with_values(f.values.T.copy()), kind, POLICY).values
        np.testing.assert_allclose(transposed, max_op_grid(f, kind, POLICY).values.T, rtol=1e-9, atol=1e-300)

    @pytest.mark.parametrize("kind", KINDS)
    def test_larger_families_dominate(self, kind):
        f = random_grid(7)
        fine = max_op_grid(f, kind, POLICY).values
        strided = max_op_grid(f, kind, CandidatePolicy(stride=2)).values
        coarse_ladder = max_op_grid(f, kind, CandidatePolicy(ladder_ratio=2 ** 0.5)).values
        assert leq(strided, fine)
        assert leq(coarse_ladder, fine)

    @pytest.mark.parametrize("kind", KINDS)
    def test_nested_ladders_share_rungs(self, kind):
        f = random_grid(7)
        fine = POLICY.radii(f, kind)
        coarse = CandidatePolicy(ladder_ratio=2 ** 0.5).radii(f, kind)
        assert set(coarse.tolist()) <= set(fine.tolist())
        assert coarse[-1] == fine[-1]

    def test_ladder_ends_at_r_max(self):
        radii = CandidatePolicy(r_max=3.3).radii(random_grid(0), "L2")
        assert radii[-1] == 3.3
        assert np.all(radii[:-1] < 3.3)

    @pytest.mark.parametrize("kind", ["Linf", "L2", "L1"])
    def test_centered_matches_direct_enumeration(self, kind):
        f = GridFunction((0.0, 0.0), 0.5, np.zeros((10, 10)))
        values = f.values.copy()
        values[4, 6] = 1.0
        f = f.with_values(values)
        policy = CandidatePolicy(r_min=0.525)
        center = f.centers()[4, 6]
        expected = max(
            avg
            for avg in (average_over_ball(f, Ball.of(kind, center, r)) for r in policy.radii(f, kind))
            if avg is not None
        )
        assert centered_max_op_grid(f, kind, policy).values[4, 6] == pytest.approx(expected, rel=1e-10)

    def test_fast_and_direct_paths_agree(self):
        f = random_grid(8)
        # shifting the origin slightly off the orthant forces the direct path
        shifted = GridFunction((-1e-9, -1e-9), f.spacing, f.values)
        for kind in ("Linf", "L1"):
            np.testing.assert_allclose(
                max_op_grid(f, kind, POLICY).values, max_op_grid(shifted, kind, POLICY).values, rtol=1e-6
            )


class TestAverages:
    def test_constant(self):
        f = GridFunction.constant(2.5, (0.0, 0.0), 0.25, (16, 16))
        assert average_over_ball(f, Ball.of("L2", (2, 2), 1)) == pytest.approx(2.5, rel=1e-14)

    def test_normalized_half_cube(self):
        s, h = 4.0, 0.05
        half_mass = (math.exp(-3) - math.exp(-5)) ** 2
        f = GridFunction.from_function(
            lambda x: np.all((x > 3) & (x < 5), axis=-1) / half_mass, (0.0, 0.0), h, (160, 160)
        )
        value = average_over_ball(f, Ball.of("Linf", (s, s), s / 2))
        assert value == pytest.approx(1 / (math.exp(-2) - math.exp(-6)) ** 2, rel=1e-2)
        assert value == pytest.approx(56.65, rel=1e-2)

    def test_support_outside_ball(self):
        f = GridFunction.from_function(lambda x: (x[..., 0] > 3).astype(float), (0.0, 0.0), 0.5, (8, 8))
        assert average_over_ball(f, Ball.of("L1", (1, 1), 0.8)) == 0.0

    def test_empty_ball(self):
        f = GridFunction.constant(1.0, (0.0, 0.0), 0.5, (4, 4))
        assert average_over_ball(f, Ball.of("Linf", (10, 10), 0.1)) is None


class TestStrongMaximal:
    def test_constant(self):
        f = GridFunction.constant(1.5, (0.0, 0.0), 1.0, (6, 5))
        np.testing.assert_allclose(strong_max_grid(f).values, 1.5, rtol=1e-14)

    def test_one_dimension_matches_brute_force(self):
        values = np.random.default_rng(0).random(12)
        f = GridFunction((0.0,), 1.0, values)
        expected = [
            max(values[a:b].mean() for a in range(0, x + 1) for b in range(x + 1, 13)) for x in range(12)
        ]
        np.testing.assert_allclose(strong_max_grid(f).values, expected, rtol=1e-12)

    def test_two_dimensions_match_brute_force(self):
        values = np.random.default_rng(3).random((5, 4))
        f = GridFunction((0.0, 0.0), 1.0, values)
        expected = np.array([
            [
                max(values[a:b, c:e].mean() for a in range(x + 1) for b in range(x + 1, 6) for c in range(y + 1) for e in range(y + 1, 5))
                for y in range(4)
            ]
            for x in range(5)
        ])
        np.testing.assert_allclose(strong_max_grid(f).values, expected, rtol=1e-12)

    def test_short_sides_keep_the_shape(self):
        f = random_grid(20, dims=(6, 5))
        capped = strong_max_grid(f, max_side=2).values
        assert capped.shape == (6, 5)
        assert np.all(capped <= strong_max_grid(f).values + 1e-12)
        assert np.all(capped >= f.values - 1e-12)

    def test_upper_bound_shape(self):
        f = random_grid(21, dims=(6, 5))
        assert strong_max_upper(f).values.shape == (6, 5)

    def test_dominates_single_rectangle(self):
        f = random_grid(9, dims=(8, 7))
        mean = f.values[2:5, 1:6].mean()
        assert np.all(strong_max_grid(f).values[2:5, 1:6] >= mean - 1e-12)

    def test_iterated_bound(self):
        f = random_grid(10, dims=(7, 9))
        assert np.all(strong_max_upper(f).values >= strong_max_grid(f).values - 1e-12)


class TestNorms:
    def test_identity_ratio(self):
        f = random_grid(11)
        report = norms_and_weak(f, f, 2.0)
        assert report.lp_ratio == pytest.approx(1.0, rel=1e-12)

    def test_levels_are_non_increasing(self):
        f = random_grid(12)
        report = norms_and_weak(f, max_op_grid(f, "Linf", POLICY), 2.0)
        assert np.all(np.diff(report.weak.level_log_measures) <= 1e-12)
        assert np.all(np.diff(report.weak.lambdas) > 0)

    def test_explicit_levels(self):
        f = random_grid(13)
        Mf = max_op_grid(f, "L1", POLICY)
        report = norms_and_weak(f, Mf, 1.0, lambdas=[0.1, 0.2, 10.0])
        assert report.weak.level_log_measures[-1] == -math.inf
        assert report.weak.level_log_measures[0] >= report.weak.level_log_measures[1]

    def test_zero_f_is_rejected(self):
        f = GridFunction.constant(0.0, (0.0, 0.0), 1.0, (3, 3))
        with pytest.raises(DomainError):
            norms_and_weak(f, f, 2.0)

    def test_exponent_below_one(self):
        f = random_grid(14)
        with pytest.raises(DomainError):
            norms_and_weak(f, f, 0.5)

    def test_maximal_function_increases_norm(self):
        f = random_grid(15)
        assert norms_and_weak(f, max_op_grid(f, "L2", POLICY), 2.0).lp_ratio >= 1.0


class TestEvenExtension:
    def test_mass_doubles_per_axis(self):
        f = random_grid(16, dims=(6, 5))
        extended = even_extension(f)
        assert log_lp_power(extended, 1.0) == pytest.approx(log_lp_power(f, 1.0) + 2 * math.log(2), rel=1e-12)

    def test_symmetric(self):
        extended = even_extension(random_grid(17, dims=(4, 3)))
        np.testing.assert_array_equal(extended.values, np.flip(extended.values, axis=0))
        np.testing.assert_array_equal(extended.values, np.flip(extended.values, axis=1))

    def test_needs_origin(self):
        with pytest.raises(DomainError):
            even_extension(GridFunction.constant(1.0, (1.0, 0.0), 1.0, (2, 2)))

    def test_maximal_function_on_symmetric_grid(self):
        extended = even_extension(random_grid(18, dims=(5, 5)))
        Mf = max_op_grid(extended, "Linf", POLICY)
        np.testing.assert_allclose(Mf.values, np.flip(Mf.values, axis=0), rtol=1e-10)

    @pytest.mark.parametrize("kind", KINDS)
    def test_line_dominates_half_line(self, kind):
        f = random_grid(19, dims=(12,))
        restricted = max_op_grid(even_extension(f), kind, POLICY).values[12:]
        assert leq(max_op_grid(f, kind, POLICY).values, restricted)
