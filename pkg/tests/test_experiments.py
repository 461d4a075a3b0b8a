import math

import pytest

from maxlab.errors import DomainError, InputError
from maxlab.experiments import SweepSpec, centered_contrast, lp_scan, lp_test_functions, weak11_scan
from maxlab.maximal import CandidatePolicy

POLICY = CandidatePolicy(stride=1, ladder_ratio=2 ** 0.5)


class TestSweepSpec:
    def test_ladder_must_increase(self):
        with pytest.raises(InputError):
            SweepSpec("cube", (8, 4))
        with pytest.raises(InputError):
            SweepSpec("cube", ())

    def test_unknown_family(self):
        with pytest.raises(InputError):
            SweepSpec("torus", (4, 8))

    def test_dimension_limit(self):
        with pytest.raises(DomainError):
            SweepSpec("constant", (4, 8), d=4)

    def test_defaults_are_resolved(self):
        spec = SweepSpec("cube", [4, 8])
        assert spec.ladder == (4.0, 8.0)
        assert spec.seed is not None
        assert spec.to_dict()["policy"] == spec.policy.key()


class TestWeakScan:
    def test_cube_family_grows(self):
        spec = SweepSpec("cube", (4, 8, 16, 32), seed=7)
        table = weak11_scan(spec)
        assert len(table.rows) == 4
        assert table.rows[0].growth is None
        assert table.min_growth >= 1.4
        assert all(r.seed == 7 and r.policy == spec.policy.key() for r in table.rows)

    def test_diamond_witness_grows(self):
        table = weak11_scan(SweepSpec("diamond", (8, 16, 32, 64)))
        assert table.min_growth > 1
        assert table.rows[2].growth >= 1.1

    def test_constant_function_is_not_amplified(self):
        table = weak11_scan(SweepSpec("constant", (2, 4, 8), policy=POLICY))
        assert all(r.log_value <= 1e-9 for r in table.rows)

    def test_grid_family_uses_family_radius(self):
        spec = SweepSpec("grid-cube", (4, 8), spacing=0.25, policy=POLICY)
        table = weak11_scan(spec)
        assert all(r.log_value > 0 for r in table.rows)
        assert table.rows[0].policy != POLICY.key()

    def test_reruns_are_identical(self):
        spec = SweepSpec("ball", (4, 8, 16))
        assert weak11_scan(spec).to_rows() == weak11_scan(spec, threads=3).to_rows()


class TestLpScan:
    def test_p_one_is_refused(self):
        with pytest.raises(DomainError):
            lp_scan(SweepSpec("bumps", (4, 8), p=1.0))
        with pytest.raises(DomainError):
            lp_scan(SweepSpec("bumps", (4, 8)))

    def test_test_family(self):
        spec = SweepSpec("bumps", (8,), p=2.0, seed=3)
        labels = [label for label, _ in lp_test_functions(spec, 8.0)]
        assert labels[:2] == ["base", "half"]
        assert len(labels) == 12

    @pytest.mark.parametrize("kind", ["Linf", "L1"])
    def test_ratios_are_at_least_one(self, kind):
        table = lp_scan(SweepSpec("bumps", (4, 8), kind=kind, p=2.0, policy=POLICY, seed=1))
        assert len(table.rows) == 2
        assert all(r.log_value >= -1e-12 for r in table.rows)
        assert all(math.isfinite(r.growth) for r in table.rows[1:])
        assert all(r.extra["worst_function"] is not None for r in table.rows)


class TestCenteredContrast:
    def test_centered_is_dominated(self):
        table = centered_contrast(SweepSpec("grid-cube", (4, 8), policy=POLICY))
        for row in table.rows:
            assert row.extra["dominated"]
            assert row.log_value >= row.extra["centered_log"] - 1e-12
        assert table.rows[1].extra["centered_growth"] is not None

    def test_one_dimension(self):
        table = centered_contrast(SweepSpec("grid-cube", (4, 8, 16), d=1, policy=POLICY))
        assert all(math.isfinite(r.log_value) and math.isfinite(r.extra["centered_log"]) for r in table.rows)
