import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional

import numpy as np

from maxlab.config import get_settings

logger = logging.getLogger(__name__)

MAX_RECORDED_POINTS = 10


@dataclass(frozen=True)
class OracleReport:
    """
    Outcome of one certificate: sampled containment, closed forms against
    direct geometry, and envelope ratios with their observed range.

    A violation is any failed inequality or inclusion; the first few
    violating points are kept for inspection.
    """

    lemma: str
    config: dict
    samples: int
    violations: int
    residual_max: float = 0.0
    envelope_min: Optional[float] = None
    envelope_max: Optional[float] = None
    tolerance: float = None
    details: dict = field(default_factory=dict)
    violating_points: tuple = ()

    def __post_init__(self):
        if self.tolerance is None:
            object.__setattr__(self, "tolerance", get_settings().oracle.residual_tol)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.residual_max < self.tolerance

    @property
    def envelope_spread(self) -> Optional[float]:
        if self.envelope_min is None or self.envelope_max is None or self.envelope_min <= 0:
            return None
        return self.envelope_max / self.envelope_min

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "config": self.config,
            "samples": self.samples,
            "violations": self.violations,
            "residual_max": self.residual_max,
            "envelope_min": self.envelope_min,
            "envelope_max": self.envelope_max,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": self.details,
            "violating_points": [list(p) for p in self.violating_points],
        }


def envelope_range(ratios: Iterable[float]):
    """(min, max) of the finite ratios, or (None, None) when there are none."""
    finite = [float(v) for v in ratios if v is not None and math.isfinite(v)]
    if not finite:
        return None, None
    return min(finite), max(finite)


def record_points(points, limit: int = MAX_RECORDED_POINTS) -> tuple:
    return tuple(tuple(float(c) for c in p) for p in list(points)[:limit])


@dataclass(frozen=True)
class SweepSummary:
    lemma: str
    instances: int
    passed: int
    samples: int
    violations: int
    residual_max: float
    envelope_min: Optional[float]
    envelope_max: Optional[float]

    @property
    def failed(self) -> int:
        return self.instances - self.passed

    @property
    def envelope_spread(self) -> Optional[float]:
        if self.envelope_min is None or self.envelope_max is None or self.envelope_min <= 0:
            return None
        return self.envelope_max / self.envelope_min

    @property
    def all_passed(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "instances": self.instances,
            "passed": self.passed,
            "failed": self.failed,
            "samples": self.samples,
            "violations": self.violations,
            "residual_max": self.residual_max,
            "envelope_min": self.envelope_min,
            "envelope_max": self.envelope_max,
            "envelope_spread": self.envelope_spread,
        }


def summarize(lemma: str, reports: List[OracleReport]) -> SweepSummary:
    lo, _ = envelope_range(r.envelope_min for r in reports)
    _, hi = envelope_range(r.envelope_max for r in reports)
    summary = SweepSummary(
        lemma=lemma,
        instances=len(reports),
        passed=sum(1 for r in reports if r.passed),
        samples=sum(r.samples for r in reports),
        violations=sum(r.violations for r in reports),
        residual_max=max((r.residual_max for r in reports), default=0.0),
        envelope_min=lo,
        envelope_max=hi,
    )
    if not summary.all_passed:
        logger.warning("%s: %d of %d instances failed", lemma, summary.failed, summary.instances)
    return summary


def run_instances(check: Callable[[np.random.Generator], OracleReport], instances: int, seed: int, threads: int = 1) -> List[OracleReport]:
    """
    Run one seeded check per instance, in instance order.

    Instance k gets the k-th child of SeedSequence(seed), so the reports
    do not depend on the number of threads.
    """
    children = np.random.SeedSequence(seed).spawn(instances)

    def run(child):
        return check(np.random.default_rng(child))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, children))
    return [run(child) for child in children]
