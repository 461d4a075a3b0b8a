import itertools
import logging
import math
from typing import List, Sequence

import numpy as np

from maxlab.config import get_settings
from maxlab.errors import DomainError
from maxlab.geometry import ConvexPolytope
from .report import OracleReport, record_points, run_instances

logger = logging.getLogger(__name__)

MC_SAMPLES = 20_000


def clipped_box_volume(a: Sequence[float], R: float) -> float:
    """|E| for E = {y in prod (0, a_i) : sum y < R}, by inclusion-exclusion over the box corners."""
    a = np.asarray(a, dtype=float)
    m = len(a)
    total = 0.0
    for size in range(m + 1):
        for subset in itertools.combinations(range(m), size):
            reach = R - float(a[list(subset)].sum())
            if reach > 0:
                total += (-1) ** size * reach ** m / math.factorial(m)
    return total


def rectangle_lemma_check(a: Sequence[float], R: float, seed: int = None, n: int = MC_SAMPLES) -> OracleReport:
    """
    Certify E inside the rectangle prod (0, a_i /\\ R) and |E| >= m^-m times its volume.

    |E| is exact; a hull volume of the same set and a Monte Carlo estimate
    are kept next to it as independent checks.
    """
    a = np.asarray(a, dtype=float)
    m = len(a)
    if m not in (2, 3):
        raise DomainError(f"The rectangle check runs in dimension 2 or 3, got {m}")
    if not (np.all(a > 0) and R > 0):
        raise DomainError("Side lengths and R must be positive")
    seed = get_settings().seed if seed is None else seed
    rng = np.random.default_rng(seed)

    sides = np.minimum(a, R)
    rect_volume = float(np.prod(sides))
    exact = clipped_box_volume(a, R)
    A = np.vstack([-np.eye(m), np.eye(m), np.ones((1, m))])
    b = np.concatenate([np.zeros(m), a, [R]])
    hull = ConvexPolytope.from_halfspaces(A, b)
    residual = abs(hull.volume - exact) / max(1.0, exact)

    violations = 0
    inner_fits = float(sides.sum()) / m <= R * (1 + 1e-12)
    violations += 0 if inner_fits else 1
    bound_holds = exact >= m ** (-m) * rect_volume * (1 - 1e-12)
    violations += 0 if bound_holds else 1

    points = rng.random((n, m)) * a
    in_E = points.sum(axis=1) < R
    outside = points[in_E & np.any(points >= sides, axis=1)]
    violations += len(outside)

    hits = rng.random((n, m)) * sides
    frac = float(np.mean(hits.sum(axis=1) < R))
    estimate = frac * rect_volume
    stderr = math.sqrt(max(frac * (1 - frac), 1.0 / n) / n) * rect_volume
    return OracleReport(
        lemma="rectangle-lemma",
        config={"a": a.tolist(), "R": float(R), "seed": seed},
        samples=n,
        violations=violations,
        residual_max=residual,
        envelope_min=exact / rect_volume,
        envelope_max=exact / rect_volume,
        details={
            "E_volume": exact,
            "rectangle_volume": rect_volume,
            "ratio": exact / rect_volume,
            "lower_bound": m ** (-m),
            "mc_estimate": estimate,
            "mc_z": (estimate - exact) / stderr,
        },
        violating_points=record_points(outside),
    )


def rectangle_sweep(instances: int = 1000, seed: int = None, dims: Sequence[int] = (2, 3), threads: int = 1) -> List[OracleReport]:
    seed = get_settings().seed if seed is None else seed

    def check(rng):
        m = int(rng.choice(dims))
        a = rng.uniform(0.1, 5.0, size=m)
        R = rng.uniform(0.1, 1.2 * float(a.sum()))
        return rectangle_lemma_check(a, R, seed=int(rng.integers(2 ** 31)))

    return run_instances(check, instances, seed, threads)
