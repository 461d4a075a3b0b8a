"""
Decay of the maximal operator between distant slices in the plane.

A slice S_i is a unit slab of the level variable: {i < |x|_1 / sqrt(2) <= i + 1}
for Euclidean balls (the first coordinate of the rotated cone) and
{i < |x|_1 <= i + 1} for diamonds. A function living on S_i only reaches
S_j through the maximal operator, and the L^p mass it carries there falls
off like exp(-delta |i - j|).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy.special import logsumexp

from maxlab.config import get_settings
from maxlab.errors import DomainError
from maxlab.geometry import NormKind
from maxlab.maximal import CandidatePolicy, GridFunction, log_lp_power, max_op_grid
from .report import OracleReport

logger = logging.getLogger(__name__)

SLICE_KINDS = (NormKind.L1, NormKind.L2)


def _validate(p: float, kind, indices) -> NormKind:
    kind = NormKind.parse(kind)
    if kind not in SLICE_KINDS:
        raise DomainError(f"Slicing runs for L1 or L2 balls, got {kind.value}")
    if not p > 1:
        raise DomainError(f"p must exceed 1, got {p}")
    if any(int(k) != k or k < 1 for k in indices):
        raise DomainError(f"Slice indices must be positive integers, got {list(indices)}")
    return kind


def slice_levels(grid: GridFunction, kind: NormKind) -> np.ndarray:
    """Level variable of every cell; cell x lies in S_i when i < level <= i + 1."""
    l1 = grid.l1_centers()
    return l1 / math.sqrt(2) if kind is NormKind.L2 else l1


def slice_mask(grid: GridFunction, kind: NormKind, i: int) -> np.ndarray:
    level = slice_levels(grid, kind)
    return (level > i) & (level <= i + 1)


def _empty_grid(spacing: float, side: float) -> GridFunction:
    cells = int(round(side / spacing))
    if cells < 2:
        raise DomainError(f"side={side} holds fewer than two cells of spacing {spacing}")
    return GridFunction.constant(0.0, (0.0, 0.0), spacing, (cells, cells))


def _random_slice_function(grid: GridFunction, mask: np.ndarray, rng: np.random.Generator) -> GridFunction:
    values = np.where(mask, rng.exponential(1.0, size=grid.dims), 0.0)
    return grid.with_values(values)


def _log_slice_power(g: GridFunction, mask: np.ndarray, p: float) -> float:
    return log_lp_power(g.with_values(np.where(mask, g.values, 0.0)), p)


def _log_ratios(f: GridFunction, kind: NormKind, p: float, i: int, targets, policy: CandidatePolicy) -> Dict[int, float]:
    """log ratio for every target slice from a single maximal function."""
    denominator = _log_slice_power(f, slice_mask(f, kind, i), p)
    if denominator == -math.inf:
        return {j: -math.inf for j in targets}
    Mf = max_op_grid(f, kind, policy)
    return {j: _log_slice_power(Mf, slice_mask(Mf, kind, j), p) - denominator for j in targets}


def slicing_decay(p: float, kind, i: int, j: int, seed: int = None, spacing: float = 0.5, side: float = 20.0,
                  policy: CandidatePolicy = None) -> float:
    """
    int_{S_j} M(f chi_{S_i})^p dmu / int_{S_i} f^p dmu for a random f >= 0 on S_i.

    A slice with no grid cells gives f = 0 and the ratio 0.
    """
    kind = _validate(p, kind, (i, j))
    seed = get_settings().seed if seed is None else seed
    grid = _empty_grid(spacing, side)
    f = _random_slice_function(grid, slice_mask(grid, kind, i), np.random.default_rng(seed))
    policy = policy or CandidatePolicy.from_settings()
    return math.exp(_log_ratios(f, kind, p, i, [j], policy)[j])


@dataclass(frozen=True)
class SlicingFit:
    p: float
    kind: NormKind
    delta: float
    intercept: float
    gaps: Tuple[int, ...]
    log_ratios: Tuple[float, ...]
    same_slice: Tuple[float, ...] = field(default=())

    @property
    def decreasing(self) -> bool:
        r = np.array(self.log_ratios)
        return bool(np.all(np.diff(r) < 1e-9))

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "kind": self.kind.value,
            "delta": self.delta,
            "intercept": self.intercept,
            "gaps": list(self.gaps),
            "log_ratios": list(self.log_ratios),
            "decreasing": self.decreasing,
        }

    def to_report(self, threshold: float = None) -> OracleReport:
        threshold = get_settings().thresholds.slicing_delta if threshold is None else threshold
        violations = int(not self.delta >= threshold) + int(not self.decreasing)
        ratios = [r for r in self.same_slice if math.isfinite(r)]
        return OracleReport(
            lemma=f"slicing:{self.kind.value}",
            config={"p": self.p, "kind": self.kind.value, "threshold": threshold},
            samples=len(self.same_slice),
            violations=violations,
            envelope_min=min(ratios) if ratios else None,
            envelope_max=max(ratios) if ratios else None,
            details=self.to_dict(),
        )


def slicing_fit(p: float, kind, i0: int = 7, max_gap: int = 6, samples: int = 20, seed: int = None,
                spacing: float = 0.5, side: float = 20.0, policy: CandidatePolicy = None) -> SlicingFit:
    """
    Fit log ratio against |i - j| for j on both sides of S_{i0}.

    For each gap the worse of the two sides is kept and the ratios are
    averaged over the random functions before taking logs.
    """
    gaps = list(range(max_gap + 1))
    kind = _validate(p, kind, [i0])
    if i0 - max_gap < 1:
        raise DomainError(f"i0={i0} leaves no slice {max_gap} below it")
    seed = get_settings().seed if seed is None else seed
    policy = policy or CandidatePolicy.from_settings()
    grid = _empty_grid(spacing, side)
    mask = slice_mask(grid, kind, i0)
    targets = sorted({i0 + s * g for g in gaps for s in (-1, 1)})

    per_sample: List[Dict[int, float]] = []
    for child in np.random.SeedSequence(seed).spawn(samples):
        f = _random_slice_function(grid, mask, np.random.default_rng(child))
        per_sample.append(_log_ratios(f, kind, p, i0, targets, policy))

    log_ratios = []
    for g in gaps:
        sides = [logsumexp([row[j] for row in per_sample]) - math.log(samples) for j in {i0 - g, i0 + g}]
        log_ratios.append(float(max(sides)))
    same_slice = tuple(math.exp(row[i0]) for row in per_sample)

    x = np.array(gaps, dtype=float)
    y = np.array(log_ratios)
    finite = np.isfinite(y)
    if finite.sum() >= 2:
        slope, intercept = np.polyfit(x[finite], y[finite], 1)
    else:
        slope, intercept = math.nan, math.nan
    logger.info("slicing fit p=%s kind=%s delta=%.4f", p, kind.value, -slope)
    return SlicingFit(p, kind, float(-slope), float(intercept), tuple(gaps), tuple(log_ratios), same_slice)
