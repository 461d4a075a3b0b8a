"""
Cube and ball families whose union region has much larger measure than one member.

A family is described in shifted coordinates q = p - c * (1, ..., 1): its
members are the balls of radius t (sup norm or Euclidean) centered at
c * 1 + y with y orthogonal to the diagonal and |y| < a in the same norm.
The standard families take c = s, t = s / 2, a = s / 4, so the set of
centers is the slice of the half ball through the center; the condensed
cube family takes c = 2s, t = a = s.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import i1e

from maxlab.config import get_settings
from maxlab.errors import CapabilityError, DomainError, InputError
from maxlab.geometry import Ball, NormKind, SlabBounds, diagonal_frame
from maxlab.maximal import CandidatePolicy, GridFunction, max_op_grid
from maxlab.measure import MeasureEstimate, MeasureMethod, measure_ball, mu_cube_exact, mu_montecarlo
from maxlab.measure.estimates import resolve_alpha

logger = logging.getLogger(__name__)

FAMILY_DIMS = (2, 3)


@dataclass(frozen=True)
class CubeBallFamily:
    kind: NormKind
    s: float
    d: int
    center_level: float
    radius: float
    spread: float
    condensed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", NormKind.parse(self.kind))
        if self.kind is NormKind.L1:
            raise InputError("Families are built from cubes or Euclidean balls")
        if self.d not in FAMILY_DIMS:
            raise DomainError(f"Families exist for d in {FAMILY_DIMS}, got {self.d}")
        if not self.s >= 2:
            raise DomainError(f"s must be at least 2, got {self.s}")

    @property
    def dim(self) -> int:
        return self.d

    @property
    def label(self) -> str:
        name = "cube" if self.kind is NormKind.LINF else "ball"
        return f"{name}-condensed" if self.condensed else name

    @property
    def preferred_proposal(self) -> str:
        return "slab"

    @property
    def center(self) -> np.ndarray:
        return np.full(self.d, self.center_level)

    @property
    def base_ball(self) -> Ball:
        return Ball.of(self.kind, self.center, self.radius)

    @property
    def half_ball(self) -> Ball:
        return Ball.of(self.kind, self.center, self.radius / 2)

    def shrunk(self, margin: float) -> "CubeBallFamily":
        """Same centers, radius reduced by margin."""
        if not 0 <= margin < self.radius:
            raise DomainError(f"Margin {margin} must lie in [0, {self.radius})")
        return CubeBallFamily(self.kind, self.s, self.d, self.center_level, self.radius - margin, self.spread, self.condensed)

    def delta_vertices(self) -> np.ndarray:
        """Vertices of the set of centers (segment in d=2, hexagon for cubes in d=3)."""
        c, a = self.center, self.spread
        if self.d == 2:
            step = np.array([1.0, -1.0]) * (a if self.kind is NormKind.LINF else a / math.sqrt(2))
            return np.array([c - step, c + step])
        if self.kind is NormKind.L2:
            raise CapabilityError("The set of centers of a Euclidean family in d=3 is a disc")
        base = np.array([[1, -1, 0], [1, 0, -1], [0, 1, -1], [-1, 1, 0], [-1, 0, 1], [0, -1, 1]], dtype=float)
        return c + a * base

    def delta_volume(self) -> float:
        """(d-1)-dimensional volume of the set of centers."""
        a = self.spread
        if self.kind is NormKind.LINF:
            return 2 * math.sqrt(2) * a if self.d == 2 else 3 * math.sqrt(3) * a ** 2
        return 2 * a if self.d == 2 else math.pi * a ** 2

    def contains(self, points) -> np.ndarray:
        """Membership in the union region."""
        p = np.asarray(points, dtype=float)
        if p.shape[-1] != self.d:
            raise InputError(f"Point dimension {p.shape[-1]} does not match family dimension {self.d}")
        q = p - self.center_level
        t, a = self.radius, self.spread
        if self.kind is NormKind.LINF:
            lo = np.maximum(q - t, -a)
            hi = np.minimum(q + t, a)
            inside = np.all(lo < hi, axis=-1) & (lo.sum(axis=-1) < 0) & (hi.sum(axis=-1) > 0)
        else:
            normal = q.sum(axis=-1) / math.sqrt(self.d)
            tangential = np.sqrt(np.maximum(np.sum(q * q, axis=-1) - normal ** 2, 0.0))
            inside = normal ** 2 + np.maximum(tangential - a, 0.0) ** 2 < t * t
        return inside & np.all(p > 0, axis=-1)

    def bounding_box(self):
        reach = self.radius + self.spread
        return np.maximum(self.center - reach, 0.0), self.center + reach

    def slab_bounds(self) -> SlabBounds:
        d = self.d
        U = diagonal_frame(d)
        reach = self.radius + self.spread
        if self.kind is NormKind.LINF:
            half_t = d * self.radius
            widths = reach * np.abs(U).sum(axis=1)
        else:
            half_t = math.sqrt(d) * self.radius
            widths = np.full(d - 1, reach)
        t0 = d * self.center_level
        return SlabBounds(max(t0 - half_t, 0.0), t0 + half_t, U @ self.center, widths)


def build_cube_family(s: float, d: int, condensed: bool = False) -> CubeBallFamily:
    if condensed:
        return CubeBallFamily(NormKind.LINF, s, d, 2 * s, s, s, condensed=True)
    return CubeBallFamily(NormKind.LINF, s, d, s, s / 2, s / 4)


def build_ball_family(s: float, d: int) -> CubeBallFamily:
    return CubeBallFamily(NormKind.L2, s, d, s, s / 2, s / 4)


def prism_log_measure(family: CubeBallFamily) -> float:
    """
    Closed-form log measure of the prism swept by the set of centers along the diagonal.

    For cubes every center moves by tau * 1 with |tau| < t; for balls by
    w along the unit normal with |w| < t. Both stay inside the union region.
    """
    d, c, t = family.d, family.center_level, family.radius
    log_vol = math.log(family.delta_volume())
    if family.kind is NormKind.LINF:
        return log_vol + 0.5 * math.log(d) - math.log(d) - d * (c - t) + math.log(-math.expm1(-2 * d * t))
    root = math.sqrt(d)
    return log_vol - d * c + root * t + math.log(-math.expm1(-2 * root * t)) - 0.5 * math.log(d)


def sample_prism(family: CubeBallFamily, n: int, rng: np.random.Generator) -> np.ndarray:
    """Points drawn strictly inside the prism."""
    d, a, t = family.d, family.spread, family.radius
    U = diagonal_frame(d)
    shrink = 1 - 1e-9
    reach = a * (np.abs(U).sum(axis=1) if family.kind is NormKind.LINF else np.ones(d - 1))
    chunks = []
    total = 0
    while total < n:
        eta = reach * (2 * rng.random((n, d - 1)) - 1)
        y = eta @ U
        if family.kind is NormKind.LINF:
            keep = np.max(np.abs(y), axis=1) < a * shrink
        else:
            keep = np.linalg.norm(eta, axis=1) < a * shrink
        y = y[keep]
        offset = t * shrink * (2 * rng.random(len(y)) - 1)
        if family.kind is NormKind.LINF:
            points = family.center + y + offset[:, None]
        else:
            points = family.center + y + offset[:, None] / math.sqrt(d)
        chunks.append(points)
        total += len(points)
    return np.concatenate(chunks)[:n]


def certify_prism(family: CubeBallFamily, n: int = 10_000, seed: Optional[int] = None) -> int:
    """Number of sampled prism points falling outside the union region (0 certifies the inclusion)."""
    seed = get_settings().seed if seed is None else seed
    points = sample_prism(family, n, np.random.default_rng(seed))
    misses = int(np.count_nonzero(~family.contains(points)))
    if misses:
        logger.warning("%d of %d prism points outside the %s union (s=%s, d=%d)", misses, n, family.label, family.s, family.d)
    return misses


def base_log_measure_exact(family: CubeBallFamily) -> float:
    """Closed-form log measure of the base ball (all cubes, Euclidean balls in d=2)."""
    if family.kind is NormKind.LINF:
        return mu_cube_exact(family.center, family.radius).log_value
    if family.d != 2:
        raise CapabilityError("No closed form for Euclidean balls in d=3")
    c, t = family.center_level, family.radius
    x = math.sqrt(2) * t
    # int_{-t}^{t} 2 sqrt(t^2 - w^2) e^{-sqrt(2) w} dw = sqrt(2) pi t I1(sqrt(2) t)
    return -2 * c + math.log(math.sqrt(2) * math.pi * t) + math.log(i1e(x)) + x


def union_log_measure_exact(family: CubeBallFamily) -> float:
    """Closed-form log measure of the union region in d=2."""
    if family.d != 2:
        raise CapabilityError("The union measure has a closed form in d=2 only")
    if family.kind is NormKind.LINF:
        c, t, a = family.center_level, family.radius, family.spread
        return -2 * c + 2 * t + math.log(math.expm1(-2 * t) ** 2 - 2 * a * math.expm1(-4 * t))
    return float(np.logaddexp(base_log_measure_exact(family), prism_log_measure(family)))


def base_log_measure(family: CubeBallFamily, n: int = None, seed: int = None, threads: int = None, alpha=None) -> MeasureEstimate:
    return measure_ball(family.base_ball, "best", alpha=alpha, n=n, seed=seed, threads=threads)


@dataclass(frozen=True)
class CounterexampleRow:
    family: str
    d: int
    s: float
    base: MeasureEstimate
    union: MeasureEstimate
    prediction_log: float
    seed: int
    alpha: tuple = ()

    @property
    def log_ratio(self) -> float:
        if self.union.zero_hits:
            return -math.inf
        return self.union.log_value - self.base.log_value

    @property
    def ratio(self) -> float:
        return math.exp(self.log_ratio)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "d": self.d,
            "s_or_N": self.s,
            "log_base_measure": self.base.log_value,
            "log_union_measure": self.union.log_value,
            "log_ratio": self.log_ratio,
            "analytic_prediction_log": self.prediction_log,
            "union_rel_stderr": self.union.rel_stderr,
            "n_samples": self.union.samples,
            "zero_hits": self.union.zero_hits,
            "seed": self.seed,
            "alpha": list(self.alpha) or None,
        }


def counterexample_ratio(family: CubeBallFamily, method: str = "montecarlo", n: int = None, seed: int = None, threads: int = None, alpha=None) -> CounterexampleRow:
    """
    Measure of the union region against the base ball.

    Args:
        family: cube or ball family
        method: "montecarlo" (slab-proposal sampling of the union) or "exact" (d=2 closed forms)
        n: Monte Carlo sample count
        seed: base seed of the Monte Carlo streams
        alpha: Laguerre exponents; both measures are then weighted by prod x_i^alpha_i
            (Monte Carlo only)

    Returns:
        CounterexampleRow; the prediction column is the prism lower bound on the log ratio,
        with the weight frozen at the family center when alpha is given
    """
    seed = get_settings().seed if seed is None else seed
    params = resolve_alpha(alpha, family.d)
    if params and method != "montecarlo":
        raise CapabilityError("Weighted counterexample measures need the Monte Carlo method")
    if method == "exact":
        base = MeasureEstimate(base_log_measure_exact(family), MeasureMethod.EXACT)
        union = MeasureEstimate(union_log_measure_exact(family), MeasureMethod.EXACT)
    elif method == "montecarlo":
        base = base_log_measure(family, n=n, seed=seed, threads=threads, alpha=params)
        union = mu_montecarlo(family, alpha=params, n=n, seed=seed, proposal="slab", threads=threads)
        if union.zero_hits:
            logger.warning("No hits in the %s union at s=%s; increase n", family.label, family.s)
    else:
        raise CapabilityError(f"Unknown counterexample method: {method}")
    prediction = prism_log_measure(family) - base.log_value
    if params:
        prediction += float(np.dot(params.alpha, np.log(family.center)))
    row = CounterexampleRow(family.label, family.d, family.s, base, union, prediction, seed, params.alpha if params else ())
    logger.info("%s d=%d s=%s: log ratio %.4f (prism bound %.4f)", row.family, row.d, row.s, row.log_ratio, row.prediction_log)
    return row


def half_ball_indicator(family: CubeBallFamily, spacing: float) -> GridFunction:
    """Grid of chi_{half ball} / mu(half ball) on a box covering the union region."""
    if family.condensed:
        raise DomainError("The condensed family has no half-ball witness")
    half = family.half_ball
    _, hi = family.bounding_box()
    dims = (int(math.ceil(float(hi.max()) / spacing)) + 1,) * family.d
    grid = GridFunction.from_function(lambda x: half.contains(x).astype(float), (0.0,) * family.d, spacing, dims)
    mass = float(np.sum(grid.values * np.exp(grid.log_cell_measure())))
    if mass == 0:
        raise DomainError(f"Spacing {spacing} is too coarse to resolve the half ball")
    return grid.with_values(grid.values / mass)


def grid_lower_bound(family: CubeBallFamily, spacing: float, samples: int = 200, seed: int = None) -> float:
    """
    Smallest value of Mf * mu(base ball) over sampled points of the union.

    f is the normalized indicator of the half ball and M the grid
    non-centered maximal operator with the family radius on the ladder.
    Points are drawn at distance 2 * spacing from the edge of the union.
    """
    seed = get_settings().seed if seed is None else seed
    f = half_ball_indicator(family, spacing)
    policy = CandidatePolicy.from_settings(extra_radii=(family.radius,))
    Mf = max_op_grid(f, family.kind, policy)
    inner = family.shrunk(2 * spacing)
    draw_lo, draw_hi = inner.bounding_box()
    rng = np.random.default_rng(seed)
    points = np.empty((0, family.d))
    while len(points) < samples:
        candidates = draw_lo + (draw_hi - draw_lo) * rng.random((4 * samples, family.d))
        points = np.concatenate([points, candidates[inner.contains(candidates)]])
    cells = np.floor(points[:samples] / spacing).astype(int)
    values = Mf.values[tuple(cells.T)]
    return float(values.min() * math.exp(base_log_measure(family).log_value))
