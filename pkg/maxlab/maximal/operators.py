"""
Grid maximal operators under the exponential measure.

Averages use the same cell-center rule in numerator and denominator, so a
constant function is reproduced exactly. A cell x sees a ball centered at
cell c with radius r whenever |x - c|_q * spacing < r; the same rule decides
which cells a ball averages over.
"""
import itertools
import logging
import math
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from maxlab.errors import CapabilityError
from maxlab.geometry import Ball, NormKind
from .grid import CandidatePolicy, GridFunction

logger = logging.getLogger(__name__)

MAX_GRID_DIM = 3


def _cell_weights(grid: GridFunction) -> np.ndarray:
    """Relative cell masses; the common factor cancels in every average."""
    l1 = grid.l1_centers()
    return np.exp(-(l1 - l1.min()))


def _cells(r: float, h: float) -> float:
    """r in units of the spacing, rounded so ladder rungs that differ by float noise agree."""
    return round(r / h, 9)


def _half_width(r: float, h: float) -> int:
    """Largest integer k with k * h < r."""
    return max(int(math.ceil(_cells(r, h))) - 1, 0)


def _footprint(kind: NormKind, d: int, r: float, h: float, dims) -> np.ndarray:
    n = _half_width(r, h)
    reach = [min(n, size - 1) for size in dims]
    offsets = np.meshgrid(*[np.arange(-k, k + 1) for k in reach], indexing="ij")
    if kind is NormKind.L2:
        squared = sum(o.astype(float) ** 2 for o in offsets)
        limit = max(int(math.ceil(round(_cells(r, h) ** 2, 9))) - 1, 0)
        return squared <= limit
    if kind is NormKind.L1:
        return sum(np.abs(o) for o in offsets) <= n
    return np.ones(offsets[0].shape, dtype=bool)


def _footprint_key(kind: NormKind, r: float, h: float):
    if kind is NormKind.L2:
        return max(int(math.ceil(round(_cells(r, h) ** 2, 9))) - 1, 0)
    return _half_width(r, h)


def _window_sums(a: np.ndarray, n: int) -> np.ndarray:
    """
    Sums over the cube of half-width n around every cell (cells outside count as zero).

    Suffix sums are differenced along each axis; with weights decreasing
    along every axis this keeps the error relative to the window's own mass.
    """
    out = a
    for axis in range(a.ndim):
        moved = np.moveaxis(out, axis, 0)
        size = moved.shape[0]
        suffix = np.concatenate([np.cumsum(moved[::-1], axis=0)[::-1], np.zeros((1,) + moved.shape[1:])])
        idx = np.arange(size)
        lo = np.clip(idx - n, 0, size)
        hi = np.clip(idx + n + 1, 0, size)
        out = np.moveaxis(suffix[lo] - suffix[hi], 0, axis)
    return np.maximum(out, 0.0)


def _rotate(a: np.ndarray):
    """Map cell (i, j) to (i + j, i - j + n1 - 1); L1 diamonds become squares."""
    n0, n1 = a.shape
    i, j = np.indices(a.shape)
    u, v = i + j, i - j + n1 - 1
    out = np.zeros((n0 + n1 - 1, n0 + n1 - 1))
    out[u, v] = a
    return out, (u, v)


class _Evaluator:
    """Per-radius averages and covering maxima for one grid function."""

    def __init__(self, f: GridFunction, kind: NormKind, policy: CandidatePolicy, centered: bool):
        self.f = f
        self.kind = kind
        self.policy = policy
        self.centered = centered
        self.weights = _cell_weights(f)
        self.weighted = f.values * self.weights
        self.mask = np.ones(f.dims, dtype=bool) if centered else policy.center_mask(f.dims)
        self.fast = f.in_orthant and (kind is NormKind.LINF or (kind is NormKind.L1 and f.dim == 2))
        if self.fast and kind is NormKind.L1:
            self.rot_weighted, self.lattice = _rotate(self.weighted)
            self.rot_weights, _ = _rotate(self.weights)
            self.rot_mask = np.zeros(self.rot_weights.shape, dtype=bool)
            self.rot_mask[self.lattice] = self.mask

    def candidates(self, r: float) -> Optional[np.ndarray]:
        """Best average over balls of radius r containing each cell, or None if every ball is empty of f."""
        h = self.f.spacing
        if self.fast and self.kind is NormKind.LINF:
            n = _half_width(r, h)
            num = _window_sums(self.weighted, n)
            if not np.any(num > 0):
                return None
            avg = np.where(self.mask, num / _window_sums(self.weights, n), 0.0)
            if self.centered:
                return avg
            return ndimage.maximum_filter(avg, size=2 * n + 1, mode="constant", cval=0.0)

        if self.fast:
            n = _half_width(r, h)
            num = _window_sums(self.rot_weighted, n)
            if not np.any(num[self.lattice] > 0):
                return None
            den = _window_sums(self.rot_weights, n)
            avg = np.zeros_like(num)
            avg[self.rot_mask] = num[self.rot_mask] / den[self.rot_mask]
            if self.centered:
                return avg[self.lattice]
            return ndimage.maximum_filter(avg, size=2 * n + 1, mode="constant", cval=0.0)[self.lattice]

        fp = _footprint(self.kind, self.f.dim, r, h, self.f.dims)
        num = ndimage.correlate(self.weighted, fp.astype(float), mode="constant", cval=0.0)
        if not np.any(num > 0):
            return None
        den = ndimage.correlate(self.weights, fp.astype(float), mode="constant", cval=0.0)
        avg = np.where(self.mask, num / den, 0.0)
        if self.centered:
            return avg
        return ndimage.maximum_filter(avg, footprint=fp, mode="constant", cval=0.0)

    def key(self, r: float):
        return _footprint_key(self.kind, r, self.f.spacing)


def _origin_split(f: GridFunction) -> Optional[int]:
    """Number of cells left of the origin when a 1-d grid has a cell boundary there, else None."""
    if f.dim != 1:
        return None
    shift = -f.origin[0] / f.spacing
    n = int(round(shift))
    if abs(shift - n) > 1e-9 or not 0 < n < f.dims[0]:
        return None
    return n


def _half_line_candidates(f: GridFunction, kind: NormKind, policy: CandidatePolicy) -> np.ndarray:
    """
    Best averages over candidate intervals clipped at the origin.

    Each half line is evaluated as a grid of its own starting at 0, the
    negative one after reflection, with the same policy.
    """
    n = _origin_split(f)
    right = GridFunction((0.0,), f.spacing, f.values[n:])
    left = GridFunction((0.0,), f.spacing, f.values[:n][::-1])
    return np.concatenate([
        _evaluate(left, kind, policy, centered=False).values[::-1],
        _evaluate(right, kind, policy, centered=False).values,
    ])


def _evaluate(f: GridFunction, kind, policy: Optional[CandidatePolicy], centered: bool) -> GridFunction:
    kind = NormKind.parse(kind)
    if f.dim > MAX_GRID_DIM:
        raise CapabilityError(f"Grid maximal operators support d <= {MAX_GRID_DIM}, got {f.dim}")
    policy = policy or CandidatePolicy.from_settings()
    result = np.zeros(f.dims)
    f_max = float(f.values.max())
    if f_max == 0:
        return f.with_values(result)

    evaluator = _Evaluator(f, kind, policy, centered)
    seen = set()
    for r in policy.radii(f, kind):
        key = evaluator.key(float(r))
        if key in seen:
            continue
        seen.add(key)
        best = evaluator.candidates(float(r))
        if best is None:
            continue
        np.maximum(result, best, out=result)
        if np.all(result >= f_max):
            logger.debug("maximal function saturated at radius %s", r)
            break
    if not centered and _origin_split(f) is not None:
        np.maximum(result, _half_line_candidates(f, kind, policy), out=result)
    return f.with_values(result)


def max_op_grid(f: GridFunction, kind, policy: CandidatePolicy = None) -> GridFunction:
    """
    Non-centered maximal function: best average over candidate balls containing each cell.

    On a one-dimensional grid with a cell boundary at the origin, candidate
    intervals clipped at the origin join the family; they are intervals too,
    and the restriction to either half line dominates the half-line operator.
    """
    return _evaluate(f, kind, policy, centered=False)


def centered_max_op_grid(f: GridFunction, kind, policy: CandidatePolicy = None) -> GridFunction:
    """Centered maximal function; the stride of the policy is ignored."""
    return _evaluate(f, kind, policy, centered=True)


def average_over_ball(f: GridFunction, ball: Ball) -> Optional[float]:
    """
    mu-average of f over the cells whose centers lie in the ball.

    Returns None when no cell center is inside the ball.
    """
    centers = f.centers().reshape(-1, f.dim)
    inside = ball.contains(centers)
    if not np.any(inside):
        return None
    weights = _cell_weights(f).ravel()[inside]
    return float(np.sum(f.values.ravel()[inside] * weights) / np.sum(weights))


def _box_means(values: np.ndarray, sides) -> np.ndarray:
    """Means over every box of the given side lengths (in cells), indexed by the box's first cell."""
    out = values
    for axis, k in enumerate(sides):
        moved = np.moveaxis(out, axis, 0)
        prefix = np.concatenate([np.zeros((1,) + moved.shape[1:]), np.cumsum(moved, axis=0)])
        out = np.moveaxis((prefix[k:] - prefix[:-k]) / k, 0, axis)
    return out


def _spread_max(means: np.ndarray, sides) -> np.ndarray:
    """For every cell, the largest mean over the boxes of the given sides that contain it."""
    out = means
    for axis, k in enumerate(sides):
        moved = np.moveaxis(out, axis, 0)
        padded = np.full((moved.shape[0] + 2 * (k - 1),) + moved.shape[1:], -np.inf)
        padded[k - 1:k - 1 + moved.shape[0]] = moved
        out = np.moveaxis(sliding_window_view(padded, k, axis=0).max(axis=-1), 0, axis)
    return out


def strong_max_grid(f: GridFunction, max_side: int = 16) -> GridFunction:
    """
    Lebesgue maximal function over axis-parallel boxes of at most max_side cells per axis.

    With max_side at least the grid size every box on the grid is enumerated.
    """
    limits = [min(size, max_side) for size in f.dims]
    result = np.zeros(f.dims)
    for sides in itertools.product(*[range(1, k + 1) for k in limits]):
        np.maximum(result, _spread_max(_box_means(f.values, sides), sides), out=result)
    return f.with_values(result)


def _hl_1d(values: np.ndarray, axis: int) -> np.ndarray:
    size = values.shape[axis]
    result = np.zeros_like(values)
    for k in range(1, size + 1):
        sides = [1] * values.ndim
        sides[axis] = k
        np.maximum(result, _spread_max(_box_means(values, sides), sides), out=result)
    return result


def strong_max_upper(f: GridFunction) -> GridFunction:
    """Iterated one-dimensional maximal functions, last axis first; dominates strong_max_grid."""
    values = f.values
    for axis in reversed(range(f.dim)):
        values = _hl_1d(values, axis)
    return f.with_values(values)
