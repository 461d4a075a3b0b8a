import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import helmert

from maxlab.errors import DomainError, InputError

logger = logging.getLogger(__name__)

MAX_DIM = 4


class NormKind(str, Enum):
    """The three norms; L1 balls are diamonds, L2 balls Euclidean balls, Linf balls cubes."""

    L1 = "L1"
    L2 = "L2"
    LINF = "Linf"

    @property
    def order(self) -> float:
        return {NormKind.L1: 1, NormKind.L2: 2, NormKind.LINF: np.inf}[self]

    @classmethod
    def parse(cls, value) -> "NormKind":
        if isinstance(value, cls):
            return value
        aliases = {
            "l1": cls.L1, "diamond": cls.L1, "d": cls.L1,
            "l2": cls.L2, "ball": cls.L2, "b": cls.L2,
            "linf": cls.LINF, "inf": cls.LINF, "cube": cls.LINF, "q": cls.LINF,
        }
        try:
            return aliases[str(value).strip().lower()]
        except KeyError:
            raise InputError(f"Unknown norm kind: {value}")


def norm(v, kind: NormKind) -> np.ndarray:
    """Vectorized norm over the last axis."""
    return np.linalg.norm(np.asarray(v, dtype=float), ord=NormKind.parse(kind).order, axis=-1)


def diagonal_frame(d: int) -> np.ndarray:
    """Rows form an orthonormal basis of the hyperplane orthogonal to (1,...,1)."""
    if d == 1:
        return np.zeros((0, 1))
    return helmert(d)


@dataclass(frozen=True)
class PointPlus:
    coords: Tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if not 1 <= len(coords) <= MAX_DIM:
            raise InputError(f"Dimension must be between 1 and {MAX_DIM}, got {len(coords)}")
        if not all(c > 0 and math.isfinite(c) for c in coords):
            raise DomainError(f"Coordinates must be finite and strictly positive: {coords}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords)


@dataclass(frozen=True)
class SlabBounds:
    """Bounds of a region in diagonal coordinates: x0 = sum(x) and eta = U x."""

    t_lo: float
    t_hi: float
    centers: np.ndarray
    half_widths: np.ndarray


@dataclass(frozen=True)
class Ball:
    """Open metric ball intersected with the open positive orthant."""

    kind: NormKind
    center: PointPlus
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "kind", NormKind.parse(self.kind))
        if not isinstance(self.center, PointPlus):
            object.__setattr__(self, "center", PointPlus(tuple(self.center)))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"Radius must be positive and finite, got {self.radius}")

    @classmethod
    def of(cls, kind, center: Sequence[float], radius: float) -> "Ball":
        return cls(NormKind.parse(kind), PointPlus(tuple(center)), float(radius))

    @property
    def dim(self) -> int:
        return self.center.dim

    @property
    def preferred_proposal(self) -> str:
        return "box" if self.kind is NormKind.LINF else "slab"

    def _check_points(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.dim:
            raise InputError(f"Point dimension {points.shape[-1]} does not match ball dimension {self.dim}")
        return points

    def contains(self, points) -> np.ndarray:
        points = self._check_points(points)
        inside = norm(points - self.center.as_array(), self.kind) < self.radius
        return inside & np.all(points > 0, axis=-1)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        c = self.center.as_array()
        return np.maximum(c - self.radius, 0.0), c + self.radius

    def slab_bounds(self) -> SlabBounds:
        d = self.dim
        c = self.center.as_array()
        U = diagonal_frame(d)
        if self.kind is NormKind.LINF:
            half_t = d * self.radius
            widths = self.radius * np.abs(U).sum(axis=1)
        elif self.kind is NormKind.L2:
            half_t = math.sqrt(d) * self.radius
            widths = np.full(d - 1, self.radius)
        else:
            half_t = self.radius
            widths = self.radius * (np.abs(U).max(axis=1) if d > 1 else np.zeros(0))
        t0 = float(c.sum())
        return SlabBounds(max(t0 - half_t, 0.0), t0 + half_t, U @ c, widths)


def ball_contains(ball: Ball, p) -> bool:
    return bool(ball.contains(np.asarray(p, dtype=float)))


def minimizing_point(ball: Ball) -> np.ndarray:
    """Point of the closed ball where |.|_1 is minimal (the formula point for diamonds)."""
    x = ball.center.as_array()
    r = ball.radius
    if r > x.min():
        raise DomainError(f"Radius {r} exceeds the smallest center coordinate {x.min()}")
    d = ball.dim
    step = {NormKind.LINF: r, NormKind.L2: r / math.sqrt(d), NormKind.L1: r / d}[ball.kind]
    return x - step


def _ray_interval(ball: Ball, direction: np.ndarray, p: np.ndarray) -> Tuple[float, float]:
    """Open interval of s with p - s*direction inside the unrestricted ball (may be empty)."""
    c = ball.center.as_array()
    w = p - c
    r = ball.radius
    if ball.kind is NormKind.L2:
        b = float(direction @ w)
        disc = b * b - (float(w @ w) - r * r)
        if disc <= 0:
            return math.inf, -math.inf
        root = math.sqrt(disc)
        return b - root, b + root

    if ball.kind is NormKind.LINF:
        lo, hi = -math.inf, math.inf
        for wi, ui in zip(w, direction):
            if ui == 0:
                if abs(wi) >= r:
                    return math.inf, -math.inf
                continue
            a, b = (wi - r) / ui, (wi + r) / ui
            lo, hi = max(lo, min(a, b)), min(hi, max(a, b))
        return lo, hi

    # L1: g(s) = |w - s u|_1 is convex piecewise linear; locate its sublevel set.
    breaks = sorted(wi / ui for wi, ui in zip(w, direction) if ui != 0)
    g = lambda s: float(np.abs(w - s * direction).sum())
    s_best = min(breaks, key=g) if breaks else 0.0
    g_min = g(s_best)
    if g_min >= r:
        return math.inf, -math.inf
    slope = float(np.abs(direction).sum())
    if slope == 0:
        return -math.inf, math.inf
    # the sublevel set is an interval around s_best; widen with the smallest slope bound
    lo, hi = s_best, s_best
    step = (r - g_min) / slope
    while g(lo - step) < r:
        lo -= step
        step *= 2
    lo_bad, lo_good = lo - step, lo
    for _ in range(200):
        mid = 0.5 * (lo_bad + lo_good)
        lo_bad, lo_good = (lo_bad, mid) if g(mid) < r else (mid, lo_good)
    step = (r - g_min) / slope
    while g(hi + step) < r:
        hi += step
        step *= 2
    hi_good, hi_bad = hi, hi + step
    for _ in range(200):
        mid = 0.5 * (hi_good + hi_bad)
        hi_good, hi_bad = (mid, hi_bad) if g(mid) < r else (hi_good, mid)
    return lo_bad, hi_bad


def shadow_contains(region, direction, p, search_points: int = 4096) -> bool:
    """
    True iff p - s*direction lies in region for some s >= 0.

    Balls are decided exactly; any other region with `contains` and
    `bounding_box` is decided by a search over s.
    """
    direction = np.asarray(direction, dtype=float)
    p = np.asarray(p, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise InputError("Shadow direction must be a unit vector")
    if p.shape != direction.shape:
        raise InputError("Point and direction dimensions differ")

    if isinstance(region, Ball):
        lo, hi = _ray_interval(region, direction, p)
        lo = max(lo, 0.0)
        # orthant constraints p_i - s u_i > 0
        for pi, ui in zip(p, direction):
            if ui > 0:
                hi = min(hi, pi / ui)
            elif ui < 0:
                lo = max(lo, pi / ui)
            elif pi <= 0:
                return False
        if lo < hi:
            return True
        return bool(lo == hi == 0.0 and region.contains(p))

    box_lo, box_hi = region.bounding_box()
    s_max = float(np.abs(p - box_lo).sum() + np.abs(box_hi - box_lo).sum())
    s = np.linspace(0.0, s_max, search_points)
    return bool(np.any(region.contains(p[None, :] - s[:, None] * direction[None, :])))
