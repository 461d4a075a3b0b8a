"""
Size ladders for the weak-type blow-up and the L^p stability.

Every scan walks a strictly increasing ladder of sizes at one grid
resolution and one candidate policy, and reports the growth factor
between consecutive entries. Rows carry the seed and the policy key so a
table can be reproduced exactly.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from maxlab.config import get_settings
from maxlab.counterexamples import (
    build_ball_family,
    build_cube_family,
    counterexample_ratio,
    diamond_weak_functional,
    diamond_witness,
    half_ball_indicator,
)
from maxlab.errors import DomainError, InputError
from maxlab.geometry import Ball, NormKind
from maxlab.maximal import (
    CandidatePolicy,
    GridFunction,
    centered_max_op_grid,
    max_op_grid,
    norms_and_weak,
    weak_type_report,
)
from maxlab.maximal.operators import MAX_GRID_DIM

logger = logging.getLogger(__name__)

FAMILIES = ("cube", "ball", "diamond", "grid-cube", "grid-ball", "constant", "bumps")
BUMP_CENTERS = 10


@dataclass(frozen=True)
class SweepSpec:
    """
    One ladder of sizes with everything needed to rerun it.

    The ladder holds s for the cube and ball families, N for the diamond
    witness and the box side L for grid scans.
    """

    family: str
    ladder: Tuple[float, ...]
    d: int = 2
    kind: NormKind = NormKind.LINF
    p: Optional[float] = None
    spacing: float = 0.5
    policy: CandidatePolicy = None
    method: str = "exact"
    samples: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "ladder", tuple(float(v) for v in self.ladder))
        object.__setattr__(self, "kind", NormKind.parse(self.kind))
        if self.policy is None:
            object.__setattr__(self, "policy", CandidatePolicy.from_settings())
        if self.seed is None:
            object.__setattr__(self, "seed", get_settings().seed)
        if self.family not in FAMILIES:
            raise InputError(f"Unknown test-function family: {self.family}")
        if not self.ladder:
            raise InputError("The ladder is empty")
        if any(v <= 0 for v in self.ladder) or any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise InputError(f"The ladder must be positive and strictly increasing, got {self.ladder}")
        if not 1 <= self.d <= MAX_GRID_DIM:
            raise DomainError(f"Scans run for 1 <= d <= {MAX_GRID_DIM}, got {self.d}")
        if not self.spacing > 0:
            raise InputError(f"Spacing must be positive, got {self.spacing}")

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "ladder": list(self.ladder),
            "d": self.d,
            "kind": self.kind.value,
            "p": self.p,
            "spacing": self.spacing,
            "policy": self.policy.key(),
            "method": self.method,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ScanRow:
    scan: str
    family: str
    size: float
    log_value: float
    seed: int
    policy: str
    growth: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scan": self.scan,
            "family": self.family,
            "size": self.size,
            "log_value": self.log_value,
            "growth": self.growth,
            "seed": self.seed,
            "policy": self.policy,
            **self.extra,
        }


@dataclass(frozen=True)
class ScanTable:
    spec: SweepSpec
    rows: Tuple[ScanRow, ...]

    @property
    def growth_factors(self) -> List[float]:
        return [r.growth for r in self.rows if r.growth is not None]

    @property
    def min_growth(self) -> Optional[float]:
        return min(self.growth_factors, default=None)

    @property
    def max_growth(self) -> Optional[float]:
        return max(self.growth_factors, default=None)

    def to_rows(self) -> List[dict]:
        return [r.to_dict() for r in self.rows]


def _growth(logs: Sequence[float]) -> List[Optional[float]]:
    out: List[Optional[float]] = [None]
    for prev, curr in zip(logs, logs[1:]):
        out.append(math.exp(curr - prev) if math.isfinite(prev) and math.isfinite(curr) else None)
    return out


def _map_entries(work: Callable[[float], Tuple[float, dict, str]], ladder, threads: int):
    """Evaluate ladder entries, in ladder order."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(work, ladder))
    return [work(v) for v in ladder]


def _table(scan: str, spec: SweepSpec, results) -> ScanTable:
    logs = [log for log, _, _ in results]
    rows = tuple(
        ScanRow(scan, spec.family, size, log, spec.seed, key, growth, extra)
        for size, (log, extra, key), growth in zip(spec.ladder, results, _growth(logs))
    )
    table = ScanTable(spec, rows)
    logger.info("%s %s: growth factors %s", scan, spec.family, [round(g, 4) for g in table.growth_factors])
    return table


def _box(spec: SweepSpec, side: float) -> GridFunction:
    cells = max(2, int(round(side / spec.spacing)))
    return GridFunction.constant(0.0, (0.0,) * spec.d, spec.spacing, (cells,) * spec.d)


def _family(spec: SweepSpec, s: float):
    if spec.family in ("cube", "grid-cube"):
        return build_cube_family(s, spec.d)
    return build_ball_family(s, spec.d)


def _weak_entry(spec: SweepSpec, size: float):
    if spec.family in ("cube", "ball"):
        row = counterexample_ratio(_family(spec, size), method=spec.method, n=spec.samples, seed=spec.seed)
        return row.log_ratio, {"prediction_log": row.prediction_log}, spec.policy.key()
    if spec.family == "diamond":
        estimate = diamond_weak_functional(diamond_witness(size, spec.d), seed=spec.seed)
        return estimate.log_value, {"zero_hits": estimate.zero_hits}, spec.policy.key()
    if spec.family in ("grid-cube", "grid-ball"):
        family = _family(spec, size)
        f = half_ball_indicator(family, spec.spacing)
        policy = replace(spec.policy, extra_radii=spec.policy.extra_radii + (family.radius,))
        weak = weak_type_report(f, max_op_grid(f, family.kind, policy))
        return weak.functional_log, {"cells": int(f.values.size)}, policy.key()
    if spec.family == "constant":
        f = _box(spec, size)
        f = f.with_values(np.ones(f.dims))
        weak = weak_type_report(f, max_op_grid(f, spec.kind, spec.policy))
        return weak.functional_log, {}, spec.policy.key()
    raise InputError(f"The weak-type scan has no {spec.family} family")


def weak11_scan(spec: SweepSpec, threads: int = 1) -> ScanTable:
    """Weak-type functional per ladder entry; it grows without bound when the operator is not of weak type (1,1)."""
    return _table("weak11", spec, _map_entries(lambda v: _weak_entry(spec, v), spec.ladder, threads))


def lp_test_functions(spec: SweepSpec, side: float) -> List[Tuple[str, GridFunction]]:
    """
    Indicators of the counterexample balls and exponential bumps on (0, side)^d.

    The balls are the base ball of the standard family at s = side / 4 and
    its half ball, in the norm of the scan; the bumps are e^{-|x - x0|_1}
    at centers drawn from the spec seed.
    """
    grid = _box(spec, side)
    x = grid.centers()
    s = side / 4
    center = np.full(spec.d, s)
    functions = []
    for label, radius in (("base", s / 2), ("half", s / 4)):
        ball = Ball.of(spec.kind, center, radius)
        values = ball.contains(x).astype(float)
        if values.any():
            functions.append((label, grid.with_values(values)))
    rng = np.random.default_rng(spec.seed)
    for k, x0 in enumerate(rng.uniform(0.0, side, size=(BUMP_CENTERS, spec.d))):
        functions.append((f"bump{k}", grid.with_values(np.exp(-np.abs(x - x0).sum(axis=-1)))))
    return functions


def _lp_entry(spec: SweepSpec, side: float):
    best, best_label = -math.inf, None
    for label, f in lp_test_functions(spec, side):
        report = norms_and_weak(f, max_op_grid(f, spec.kind, spec.policy), spec.p)
        if report.log_lp_ratio > best:
            best, best_label = report.log_lp_ratio, label
    return best, {"p": spec.p, "worst_function": best_label}, spec.policy.key()


def lp_scan(spec: SweepSpec, threads: int = 1) -> ScanTable:
    """Largest |Mf|_p / |f|_p over the test family on growing boxes (0, L)^d."""
    if spec.p is None or not spec.p > 1:
        raise DomainError(f"The L^p scan needs p > 1, got {spec.p}; use the weak-type scan for p = 1")
    return _table("lp", spec, _map_entries(lambda v: _lp_entry(spec, v), spec.ladder, threads))


def _contrast_function(spec: SweepSpec, s: float) -> GridFunction:
    if spec.d >= 2:
        return half_ball_indicator(build_cube_family(s, spec.d), spec.spacing)
    grid = _box(spec, 2 * s)
    return grid.with_values(Ball.of(NormKind.LINF, (s,), s / 4).contains(grid.centers()).astype(float))


def _contrast_entry(spec: SweepSpec, s: float):
    f = _contrast_function(spec, s)
    policy = replace(spec.policy, extra_radii=spec.policy.extra_radii + (s / 2,))
    Mf = max_op_grid(f, spec.kind, policy)
    Mcf = centered_max_op_grid(f, spec.kind, policy)
    centered = weak_type_report(f, Mcf).functional_log
    noncentered = weak_type_report(f, Mf).functional_log
    dominated = bool(np.all(Mcf.values <= Mf.values * (1 + 1e-12)))
    if not dominated:
        logger.warning("centered maximal function exceeds the non-centered one at s=%s", s)
    return noncentered, {"centered_log": centered, "dominated": dominated}, policy.key()


def centered_contrast(spec: SweepSpec, threads: int = 1) -> ScanTable:
    """
    Centered against non-centered weak-type functionals on one ladder.

    log_value and growth refer to the non-centered operator; the centered
    growth is added to every row.
    """
    table = _table("contrast", spec, _map_entries(lambda v: _contrast_entry(spec, v), spec.ladder, threads))
    centered = _growth([r.extra["centered_log"] for r in table.rows])
    rows = tuple(replace(r, extra={**r.extra, "centered_growth": g}) for r, g in zip(table.rows, centered))
    return ScanTable(spec, rows)
