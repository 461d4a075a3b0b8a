"""
Configurations the certificates run on.

A BallConeConfig is a Euclidean ball B(m, r) seen in the rotated frame,
where the positive orthant becomes the cone C+ around the first axis. All
coordinates are rotated coordinates: the height is y[0] and the horizontal
cross-section at height a1 + h is described in the slice coordinates y[1:].
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Tuple

import numpy as np

from maxlab.errors import ClassificationError, DomainError, InputError
from maxlab.geometry import Ball, ConeFrame, ConvexPolytope, NormKind, bottom_point
from maxlab.geometry.balls import MAX_DIM

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 1000
MIN_BOTTOM = 2.0
FACE_TOL = 1e-9


class ConeCase(str, Enum):
    VERTEX = "vertex"
    SIDE = "side"
    EDGE = "edge"

    @classmethod
    def parse(cls, value) -> "ConeCase":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InputError(f"Unknown boundary case: {value}") from None


VALID_CASES = {
    2: (ConeCase.VERTEX,),
    3: (ConeCase.VERTEX, ConeCase.SIDE),
    4: (ConeCase.VERTEX, ConeCase.SIDE, ConeCase.EDGE),
}


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class BallConeConfig:
    """
    Ball B(m, r) whose lowest point a in the closed cone sits above height 2.

    Derived quantities follow the usual names: delta = m1 - a1, R is the
    radius of the ball's slice at the height of a, n the outward unit normal
    of that slice at a'.
    """

    m: Tuple[float, ...]
    r: float

    def __post_init__(self):
        m = tuple(float(v) for v in self.m)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "r", float(self.r))
        d = len(m)
        if not 2 <= d <= MAX_DIM:
            raise DomainError(f"Ball-cone configurations need 2 <= d <= {MAX_DIM}, got {d}")
        if not self.r > math.sqrt(d):
            raise DomainError(f"Radius must exceed sqrt(d) = {math.sqrt(d):.4f}, got {self.r}")
        if not self.frame.contains(np.array(m)):
            raise DomainError(f"Center {m} is not inside the cone")
        if not self.a[0] > MIN_BOTTOM:
            raise DomainError(f"Bottom point height must exceed {MIN_BOTTOM}, got {self.a[0]}")
        slack = 1e-12 * self.r
        if not self.r / math.sqrt(d) - slack <= self.delta <= self.r + slack:
            raise DomainError(f"m1 - a1 = {self.delta} is outside [r/sqrt(d), r]")
        if not self.R > 1e-12 * self.r:
            raise DomainError("The ball touches the cone only below its center; the slice at a is degenerate")

    @classmethod
    def from_orthant(cls, center, r: float) -> "BallConeConfig":
        """Build from a center given in the original (unrotated) coordinates."""
        center = np.asarray(center, dtype=float)
        return cls(tuple(ConeFrame(len(center)).rotate(center)), r)

    @property
    def d(self) -> int:
        return len(self.m)

    @cached_property
    def frame(self) -> ConeFrame:
        return ConeFrame(self.d)

    @cached_property
    def center(self) -> np.ndarray:
        return np.array(self.m)

    @cached_property
    def a(self) -> np.ndarray:
        return bottom_point(self.frame, self.center, self.r)

    @property
    def bottom(self) -> float:
        return float(self.a[0])

    @cached_property
    def delta(self) -> float:
        return float(self.center[0] - self.a[0])

    @cached_property
    def center_slice(self) -> np.ndarray:
        return self.center[1:].copy()

    @cached_property
    def vertex(self) -> np.ndarray:
        """a' in slice coordinates."""
        return self.a[1:].copy()

    @cached_property
    def R(self) -> float:
        return float(np.linalg.norm(self.vertex - self.center_slice))

    @cached_property
    def n(self) -> np.ndarray:
        return (self.vertex - self.center_slice) / self.R

    @cached_property
    def active_faces(self) -> Tuple[int, ...]:
        return self.frame.active_faces(self.a, tol=FACE_TOL)

    @cached_property
    def case(self) -> ConeCase:
        return classify(self)

    def level(self, h: float) -> float:
        return self.bottom + h

    def slice_radius(self, h: float) -> float:
        """R_h: radius of the ball's slice at height a1 + h."""
        if not 0 <= h < self.r + self.delta:
            raise DomainError(f"h = {h} is outside [0, r + m1 - a1)")
        return math.sqrt(self.r ** 2 - (self.delta - h) ** 2)

    def section(self, h: float) -> ConvexPolytope:
        """C_h: the cone's cross-section at height a1 + h, in slice coordinates."""
        A, b = self.frame.section_halfspaces(self.level(h))
        return ConvexPolytope.from_halfspaces(A, b)

    def section_halfspaces(self, h: float):
        return self.frame.section_halfspaces(self.level(h))

    def apex(self, h: float) -> np.ndarray:
        """a'_h: the point of C_h homothetic to a'; the vertex of C_h when a' is a vertex."""
        return self.vertex * (self.level(h) / self.bottom)

    def section_vertices(self, h: float = 0.0) -> np.ndarray:
        return self.frame.section_vertices(self.level(h))[:, 1:]

    @cached_property
    def vertex_index(self) -> int:
        """Index of the cross-section vertex at a' (vertex case only)."""
        if self.case is not ConeCase.VERTEX:
            raise ClassificationError(f"a' is not a vertex of the cross-section ({self.case.value} case)")
        (k,) = tuple(k for k in range(self.d) if k not in self.active_faces)
        return k

    @cached_property
    def cone_edges(self) -> np.ndarray:
        """Unit edge directions of C_0 leaving the vertex a', one row per edge."""
        vertices = self.section_vertices()
        k0 = self.vertex_index
        return np.array([_unit(vertices[j] - vertices[k0]) for j in range(self.d) if j != k0])

    @cached_property
    def edge_sines(self) -> np.ndarray:
        """sin of the angle between each edge at a' and the tangent plane of the slice at a'."""
        return self.cone_edges @ self.n

    @cached_property
    def inward_normals(self) -> np.ndarray:
        """Unit inward normals, in slice coordinates, of the cross-section faces through a'."""
        Q = self.frame.rotation
        return np.array([_unit(Q[1:, k]) for k in self.active_faces])

    def tau(self, points) -> np.ndarray:
        """Signed height <x' - m', n> in the slice."""
        return (np.asarray(points, dtype=float) - self.center_slice) @ self.n

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "m": list(self.m),
            "r": self.r,
            "a": [float(v) for v in self.a],
            "delta": self.delta,
            "R": self.R,
            "case": self.case.value,
            "active_faces": list(self.active_faces),
        }


def classify(cfg: BallConeConfig) -> ConeCase:
    """
    Boundary case of a' by the number of cross-section faces through it.

    d - 1 faces make a vertex, one face a side (d >= 3), two faces an edge
    (d = 4). A bottom point on no face is a ball resting on the cone from
    inside, which none of the constructions handle.
    """
    k = len(cfg.active_faces)
    d = cfg.d
    if k == d - 1:
        return ConeCase.VERTEX
    if k == 1 and d >= 3:
        return ConeCase.SIDE
    if k == 2 and d == 4:
        return ConeCase.EDGE
    raise ClassificationError(f"Bottom point {cfg.a} lies on {k} faces of the {d}-dimensional cone")


def _face_count(d: int, case: ConeCase) -> int:
    return {ConeCase.VERTEX: d - 1, ConeCase.SIDE: 1, ConeCase.EDGE: 2}[case]


def random_ball_config(d: int, case=ConeCase.VERTEX, rng: np.random.Generator = None) -> BallConeConfig:
    """
    Random configuration with a' in the requested boundary case.

    The bottom point a is drawn first, strictly inside the chosen faces of
    the cross-section; the center is then placed at distance r along a
    direction satisfying the optimality conditions for a, so that a is the
    lowest point of the ball in the cone.
    """
    case = ConeCase.parse(case)
    if d not in VALID_CASES or case not in VALID_CASES[d]:
        raise InputError(f"No {case.value} case in dimension {d}")
    rng = rng or np.random.default_rng()
    frame = ConeFrame(d)
    Q = frame.rotation
    e1 = np.eye(d)[0]
    k = _face_count(d, case)

    for _ in range(MAX_ATTEMPTS):
        bottom = rng.uniform(MIN_BOTTOM, 20.0)
        r = rng.uniform(1.01 * math.sqrt(d), 20.0)
        if bottom <= MIN_BOTTOM:
            continue
        faces = rng.choice(d, size=k, replace=False)
        outside = [j for j in range(d) if j not in faces]
        weights = 0.1 + rng.dirichlet(np.ones(len(outside)))
        weights /= weights.sum()
        a = weights @ frame.section_vertices(bottom)[outside]
        nu = rng.uniform(0.02, 0.98, size=k) / math.sqrt(d)
        direction = e1 - nu @ Q[:, faces].T
        m = a + r * _unit(direction)
        try:
            cfg = BallConeConfig(tuple(m), r)
            if cfg.case is case:
                return cfg
        except (DomainError, ClassificationError) as e:
            logger.debug("rejected configuration: %s", e)
    raise DomainError(f"No {case.value} configuration found in dimension {d} after {MAX_ATTEMPTS} attempts")


@dataclass(frozen=True)
class DiamondConfig:
    """
    Diamond D(z, r) with a point xi inside it.

    Coordinates are renumbered on construction so that z_d is the largest;
    perm records the original index of each stored coordinate.
    """

    z: Tuple[float, ...]
    r: float
    xi: Tuple[float, ...]

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        xi = np.asarray(self.xi, dtype=float)
        d = len(z)
        if not 2 <= d <= MAX_DIM:
            raise DomainError(f"Diamond configurations need 2 <= d <= {MAX_DIM}, got {d}")
        if xi.shape != z.shape:
            raise InputError(f"xi has dimension {len(xi)}, z has {d}")
        if z[-1] >= z.max():
            perm = list(range(d))
        else:
            last = int(np.argmax(z))
            perm = [j for j in range(d) if j != last] + [last]
        object.__setattr__(self, "z", tuple(float(v) for v in z[perm]))
        object.__setattr__(self, "xi", tuple(float(v) for v in xi[perm]))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "perm", tuple(perm))

        if not np.all(z > 0):
            raise DomainError(f"Diamond center must lie in the open orthant, got {tuple(z)}")
        if not self.r >= 1:
            raise DomainError(f"Diamond radius must be at least 1, got {self.r}")
        if not self.b > MIN_BOTTOM:
            raise DomainError(f"Diamond bottom z0 - r must exceed {MIN_BOTTOM}, got {self.b}")
        if not (np.all(xi > 0) and np.abs(xi - z).sum() < self.r):
            raise DomainError(f"xi = {tuple(xi)} is not inside the diamond")

    @property
    def d(self) -> int:
        return len(self.z)

    @property
    def z0(self) -> float:
        return float(sum(self.z))

    @property
    def xi0(self) -> float:
        return float(sum(self.xi))

    @property
    def b(self) -> float:
        return self.z0 - self.r

    @property
    def ball(self) -> Ball:
        return Ball.of(NormKind.L1, self.z, self.r)

    def to_dict(self) -> dict:
        return {"d": self.d, "z": list(self.z), "r": self.r, "xi": list(self.xi), "b": self.b, "perm": list(self.perm)}


def random_diamond_config(d: int, rng: np.random.Generator = None) -> DiamondConfig:
    rng = rng or np.random.default_rng()
    for _ in range(MAX_ATTEMPTS):
        r = rng.uniform(1.0, 10.0)
        z = rng.uniform(0.1, 10.0, size=d)
        if z.sum() - r <= MIN_BOTTOM:
            z += (MIN_BOTTOM - (z.sum() - r) + rng.uniform(0.1, 1.0)) / d
        offset = rng.dirichlet(np.ones(d + 1))[:d] * rng.choice((-1.0, 1.0), size=d)
        xi = z + 0.999 * r * offset
        try:
            return DiamondConfig(tuple(z), r, tuple(xi))
        except DomainError as e:
            logger.debug("rejected diamond configuration: %s", e)
    raise DomainError(f"No diamond configuration found in dimension {d} after {MAX_ATTEMPTS} attempts")


def random_level(cfg: DiamondConfig, rng: np.random.Generator) -> float:
    """A height t drawn uniformly from the open range (b, b + 2r)."""
    while True:
        t = rng.uniform(cfg.b, cfg.b + 2 * cfg.r)
        if cfg.b < t < cfg.b + 2 * cfg.r:
            return float(t)
