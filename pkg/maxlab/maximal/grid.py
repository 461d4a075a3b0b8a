import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from maxlab.errors import DomainError, InputError
from maxlab.geometry import NormKind, norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridFunction:
    """
    Nonnegative function sampled at the centers of a regular grid.

    Cell k covers origin + spacing * [k, k + 1) along each axis and the value
    is attached to its center.
    """

    origin: Tuple[float, ...]
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        origin = tuple(float(o) for o in self.origin)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "values", values)
        if values.ndim != len(origin):
            raise InputError(f"Values have {values.ndim} axes but origin has {len(origin)} coordinates")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise InputError(f"Spacing must be positive, got {self.spacing}")
        if not all(math.isfinite(o) for o in origin):
            raise InputError("Origin must be finite")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InputError("Grid values must be finite and nonnegative")

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], origin: Sequence[float], spacing: float, dims: Sequence[int]) -> "GridFunction":
        """Sample func (taking an (..., d) array of points) at the cell centers."""
        empty = cls(tuple(origin), spacing, np.zeros(tuple(dims)))
        return empty.with_values(func(empty.centers()))

    @classmethod
    def constant(cls, value: float, origin: Sequence[float], spacing: float, dims: Sequence[int]) -> "GridFunction":
        return cls(tuple(origin), spacing, np.full(tuple(dims), float(value)))

    @property
    def dim(self) -> int:
        return len(self.origin)

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def touches_boundary(self) -> bool:
        return bool(np.allclose(self.origin, 0.0, atol=1e-12 * self.spacing))

    @property
    def in_orthant(self) -> bool:
        return all(o >= -1e-12 * self.spacing for o in self.origin)

    def with_values(self, values) -> "GridFunction":
        values = np.asarray(values, dtype=float)
        if values.shape != self.dims:
            raise InputError(f"Expected values of shape {self.dims}, got {values.shape}")
        return GridFunction(self.origin, self.spacing, values)

    def axis_centers(self, axis: int) -> np.ndarray:
        return self.origin[axis] + (np.arange(self.dims[axis]) + 0.5) * self.spacing

    def centers(self) -> np.ndarray:
        axes = [self.axis_centers(k) for k in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def l1_centers(self) -> np.ndarray:
        """|x|_1 at every cell center, broadcast to the grid shape."""
        total = np.zeros(self.dims)
        for k in range(self.dim):
            shape = [1] * self.dim
            shape[k] = self.dims[k]
            total = total + np.abs(self.axis_centers(k)).reshape(shape)
        return total

    def log_cell_measure(self) -> np.ndarray:
        """Midpoint log-measure of each cell under the density e^{-|x|_1}."""
        return -self.l1_centers() + self.dim * math.log(self.spacing)

    def same_geometry(self, other: "GridFunction") -> bool:
        return self.origin == other.origin and self.spacing == other.spacing and self.dims == other.dims

    def header(self) -> dict:
        return {"origin": list(self.origin), "spacing": self.spacing, "dims": list(self.dims)}


def save_grid(grid: GridFunction, stem) -> Tuple[Path, Path]:
    """Write <stem>.csv (multi-index and value per row) and <stem>.json (origin, spacing, dims)."""
    stem = Path(stem)
    csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(grid.header(), f, sort_keys=True)
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow([f"i{k}" for k in range(grid.dim)] + ["value"])
        for index in np.ndindex(grid.dims):
            writer.writerow(list(index) + [repr(float(grid.values[index]))])
    return csv_path, json_path


def load_grid(stem) -> GridFunction:
    stem = Path(stem)
    with open(stem.with_suffix(".json"), "r", encoding="utf-8") as f:
        header = json.load(f)
    values = np.zeros(tuple(header["dims"]))
    with open(stem.with_suffix(".csv"), "r", newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        next(reader)
        for row in reader:
            values[tuple(int(i) for i in row[:-1])] = float(row[-1])
    return GridFunction(tuple(header["origin"]), float(header["spacing"]), values)


@dataclass(frozen=True)
class CandidatePolicy:
    """
    Discretization of the supremum over balls.

    Centers run over grid cells whose every index is a multiple of stride;
    radii form the ladder r_min * ladder_ratio**k below r_max, then r_max
    itself, plus any extra_radii. r_min defaults to the spacing and r_max to
    the diameter of the grid box in the ball's norm.
    """

    stride: int = 1
    ladder_ratio: float = 2.0 ** 0.25
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    extra_radii: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "extra_radii", tuple(sorted(float(r) for r in self.extra_radii)))
        if int(self.stride) != self.stride or self.stride < 1:
            raise InputError(f"Stride must be a positive integer, got {self.stride}")
        if not 1 < self.ladder_ratio <= 2:
            raise InputError(f"Ladder ratio must lie in (1, 2], got {self.ladder_ratio}")
        if self.r_min is not None and self.r_min <= 0:
            raise InputError("r_min must be positive")
        if self.r_min is not None and self.r_max is not None and self.r_max < self.r_min:
            raise InputError("r_max must not be smaller than r_min")
        if any(r <= 0 for r in self.extra_radii):
            raise InputError("Extra radii must be positive")

    @classmethod
    def from_settings(cls, settings=None, **overrides) -> "CandidatePolicy":
        from maxlab.config import get_settings

        settings = settings or get_settings()
        options = {"stride": settings.maximal.stride, "ladder_ratio": settings.maximal.ladder_ratio}
        options.update(overrides)
        return cls(**options)

    def radii(self, grid: GridFunction, kind) -> np.ndarray:
        kind = NormKind.parse(kind)
        r_min = self.r_min if self.r_min is not None else grid.spacing
        if r_min < grid.spacing * (1 - 1e-12):
            raise DomainError(f"r_min={r_min} is below the grid spacing {grid.spacing}")
        diameter = float(norm(np.array(grid.dims) * grid.spacing, kind)) + grid.spacing
        r_max = self.r_max if self.r_max is not None else max(diameter, r_min)
        steps = int(math.ceil(math.log(r_max / r_min) / math.log(self.ladder_ratio) - 1e-12)) if r_max > r_min else 0
        # rungs sit on a shared base-2 exponent lattice; a nested ladder repeats them bit for bit
        exponents = np.round(np.arange(steps + 1) * math.log2(self.ladder_ratio), 9)
        ladder = r_min * 2.0 ** exponents
        ladder = np.append(ladder[ladder < r_max * (1 - 1e-12)], r_max)
        return np.unique(np.concatenate([ladder, np.array(self.extra_radii)]))

    def center_mask(self, dims: Sequence[int]) -> np.ndarray:
        mask = np.ones(tuple(dims), dtype=bool)
        for axis, size in enumerate(dims):
            shape = [1] * len(dims)
            shape[axis] = size
            mask &= (np.arange(size) % self.stride == 0).reshape(shape)
        return mask

    def key(self) -> str:
        """Short stable hash identifying the policy in result rows."""
        text = repr((self.stride, self.ladder_ratio, self.r_min, self.r_max, self.extra_radii))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
