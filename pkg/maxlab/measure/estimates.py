import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional, Tuple

from maxlab.errors import DomainError, InputError


class MeasureMethod(str, Enum):
    EXACT = "exact"
    QUADRATURE = "quadrature"
    MONTECARLO = "montecarlo"

    @classmethod
    def parse(cls, value) -> "MeasureMethod":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InputError(f"Unknown measure method: {value}")


@dataclass(frozen=True)
class MeasureEstimate:
    """
    Natural log of a measure together with how it was obtained.

    A Monte Carlo run without a single hit reports log_value = -inf and
    zero_hits = True; callers retry with more samples.
    """

    log_value: float
    method: MeasureMethod
    rel_stderr: float = 0.0
    samples: int = 0
    zero_hits: bool = False

    def __post_init__(self):
        object.__setattr__(self, "method", MeasureMethod.parse(self.method))
        if self.method is not MeasureMethod.MONTECARLO and (self.rel_stderr != 0 or self.samples != 0):
            raise InputError("Deterministic estimates carry no standard error and no samples")
        if self.method is MeasureMethod.MONTECARLO and self.samples <= 0:
            raise InputError("Monte Carlo estimates need a positive sample count")
        if not self.zero_hits and not math.isfinite(self.log_value):
            raise InputError(f"Non-finite log measure {self.log_value} without the zero-hit flag")

    def to_dict(self) -> dict:
        return {
            "log_value": self.log_value,
            "method": self.method.value,
            "rel_stderr": self.rel_stderr,
            "samples": self.samples,
            "zero_hits": self.zero_hits,
        }


@dataclass(frozen=True)
class LaguerreParams:
    alpha: Tuple[float, ...]

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if not all(a > -1 for a in alpha):
            raise DomainError(f"Every alpha must exceed -1, got {alpha}")

    @property
    def dim(self) -> int:
        return len(self.alpha)

    @property
    def is_zero(self) -> bool:
        return all(a == 0 for a in self.alpha)


def resolve_alpha(alpha, d: int) -> Optional[LaguerreParams]:
    """Normalize an optional alpha argument; all-zero alpha means the plain measure."""
    if alpha is None:
        return None
    if not isinstance(alpha, LaguerreParams):
        alpha = LaguerreParams(tuple(alpha))
    if alpha.dim != d:
        raise InputError(f"alpha has {alpha.dim} entries for a {d}-dimensional ball")
    return None if alpha.is_zero else alpha


@dataclass(frozen=True)
class DoublingReport:
    kind: str
    d: int
    radius_cap: float
    max_ratio: float
    argmax_center: Tuple[float, ...]
    argmax_radius: float
    evaluations: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EnvelopeReport:
    """Spread of measured/predicted over interior configurations."""

    kind: str
    d: int
    configs: int
    c1: float
    c2: float
    seed: int
    worst: dict = field(default_factory=dict)

    @property
    def spread(self) -> float:
        return self.c2 / self.c1

    def to_dict(self) -> dict:
        return {**asdict(self), "spread": self.spread}
