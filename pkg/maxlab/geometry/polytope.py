import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from maxlab.errors import InputError

logger = logging.getLogger(__name__)

EMPTY_TOL = 1e-12


def chebyshev_center(A: np.ndarray, b: np.ndarray) -> Tuple[Optional[np.ndarray], float]:
    """Center and radius of the largest ball inside {A x <= b}; (None, 0) when infeasible."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    row_norms = np.linalg.norm(A, axis=1)
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([A, row_norms[:, None]])
    bounds = [(None, None)] * n + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=bounds, method="highs")
    if not res.success:
        return None, 0.0
    return res.x[:n], float(res.x[-1])


@dataclass(frozen=True)
class ConvexPolytope:
    """Bounded convex polytope kept as hull vertices plus facet equations (normal.x + offset <= 0)."""

    vertices: np.ndarray
    equations: np.ndarray
    simplices: np.ndarray
    volume: float

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @classmethod
    def from_vertices(cls, points) -> Optional["ConvexPolytope"]:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or len(points) == 0:
            raise InputError("Expected a non-empty (k, n) array of points")
        if points.shape[1] == 1:
            lo, hi = float(points.min()), float(points.max())
            if hi - lo <= EMPTY_TOL:
                return None
            return cls(
                vertices=np.array([[lo], [hi]]),
                equations=np.array([[1.0, -hi], [-1.0, lo]]),
                simplices=np.array([[[lo], [hi]]]),
                volume=hi - lo,
            )
        try:
            hull = ConvexHull(points)
        except (QhullError, ValueError):
            return None
        return cls(
            vertices=points[hull.vertices],
            equations=hull.equations,
            simplices=hull.points[hull.simplices],
            volume=float(hull.volume),
        )

    @classmethod
    def from_halfspaces(cls, A, b) -> Optional["ConvexPolytope"]:
        """Polytope {A x < b}; None when empty or lower-dimensional."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        norms = np.linalg.norm(A, axis=1)
        zero = norms <= EMPTY_TOL
        if np.any(b[zero] <= 0):
            return None
        A, b, norms = A[~zero], b[~zero], norms[~zero]
        A = A / norms[:, None]
        b = b / norms

        if A.shape[1] == 1:
            col = A[:, 0]
            upper = b[col > 0] / col[col > 0]
            lower = b[col < 0] / col[col < 0]
            hi = float(upper.min()) if len(upper) else math.inf
            lo = float(lower.max()) if len(lower) else -math.inf
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise InputError("Half-spaces do not bound an interval")
            if hi - lo <= EMPTY_TOL * max(1.0, abs(hi)):
                return None
            return cls.from_vertices(np.array([[lo], [hi]]))

        center, radius = chebyshev_center(A, b)
        scale = max(1.0, float(np.max(np.abs(b))))
        if center is None or radius <= EMPTY_TOL * scale:
            return None
        try:
            hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), center)
        except (QhullError, ValueError):
            return None
        return cls.from_vertices(hs.intersections)

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        normals = self.equations[:, :-1]
        offsets = self.equations[:, -1]
        return np.all(points @ normals.T + offsets <= tol, axis=-1)

    def edges(self) -> np.ndarray:
        """Segments (k, 2, n) from the hull triangulation; in 3D this includes facet diagonals."""
        if self.dim <= 2:
            return self.simplices
        segments = []
        for tri in self.simplices:
            for i, j in itertools.combinations(range(len(tri)), 2):
                segments.append((tri[i], tri[j]))
        return np.array(segments)


def _sphere_segment_points(center, radius, p0, p1):
    direction = p1 - p0
    a = float(direction @ direction)
    if a == 0:
        return []
    w = p0 - center
    b = 2.0 * float(direction @ w)
    c = float(w @ w) - radius * radius
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    root = math.sqrt(disc)
    return [p0 + s * direction for s in ((-b - root) / (2 * a), (-b + root) / (2 * a)) if 0.0 <= s <= 1.0]


def support_ball_polytope(center, radius: float, polytope: ConvexPolytope, direction, tol: float = 1e-9) -> float:
    """
    Maximum of direction.x over the closed Euclidean ball intersected with the polytope.

    Returns -inf when the intersection is empty.
    """
    center = np.asarray(center, dtype=float)
    u = np.asarray(direction, dtype=float)
    if center.shape != u.shape or center.shape[0] != polytope.dim:
        raise InputError("Dimensions of center, direction and polytope differ")
    scale = max(1.0, radius, float(np.max(np.abs(polytope.vertices))))

    def feasible(x):
        return (np.linalg.norm(x - center) <= radius + tol * scale) and bool(
            polytope.contains(x, tol=tol * scale)
        )

    norm_u = np.linalg.norm(u)
    candidates = []
    if norm_u > 0:
        candidates.append(center + radius * u / norm_u)
    candidates.extend(v for v in polytope.vertices if np.linalg.norm(v - center) <= radius)
    for p0, p1 in polytope.edges():
        candidates.extend(_sphere_segment_points(center, radius, p0, p1))
    if polytope.dim == 3:
        for eq in np.unique(np.round(polytope.equations, 12), axis=0):
            normal, offset = eq[:-1], eq[-1]
            dist = float(normal @ center + offset)
            if abs(dist) > radius:
                continue
            disc_center = center - dist * normal
            rho = math.sqrt(max(radius * radius - dist * dist, 0.0))
            tangent = u - (u @ normal) * normal
            t_norm = np.linalg.norm(tangent)
            if t_norm > 0:
                candidates.append(disc_center + rho * tangent / t_norm)

    values = [float(u @ x) for x in candidates if feasible(x)]
    return max(values) if values else -math.inf


@dataclass(frozen=True)
class Parallelepiped:
    vertex: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        vertex = np.asarray(self.vertex, dtype=float)
        edges = np.atleast_2d(np.asarray(self.edges, dtype=float))
        object.__setattr__(self, "vertex", vertex)
        object.__setattr__(self, "edges", edges)
        if edges.shape != (vertex.shape[0], vertex.shape[0]):
            raise InputError(f"Expected {vertex.shape[0]} edges of dimension {vertex.shape[0]}")
        if abs(np.linalg.det(edges)) <= EMPTY_TOL * max(1.0, float(np.prod(np.linalg.norm(edges, axis=1)))):
            raise InputError("Parallelepiped edges must be linearly independent")

    @property
    def dim(self) -> int:
        return self.vertex.shape[0]

    @property
    def volume(self) -> float:
        return float(abs(np.linalg.det(self.edges)))

    @property
    def side_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edges, axis=1)

    def coordinates(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.linalg.solve(self.edges.T, (points - self.vertex).T).T

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        alpha = self.coordinates(points)
        return np.all((alpha >= -tol) & (alpha <= 1 + tol), axis=-1)

    def vertices(self) -> np.ndarray:
        corners = np.array(list(itertools.product((0.0, 1.0), repeat=self.dim)))
        return self.vertex + corners @ self.edges

    def contains_parallelepiped(self, other: "Parallelepiped", tol: float = 1e-9) -> bool:
        return bool(np.all(self.contains(other.vertices(), tol=tol)))


@dataclass(frozen=True)
class FrameBox:
    """
    Parallelepiped written as a box lo <= alpha <= hi in a fixed basis of unit edge directions.

    Points are x = alpha @ directions. Boxes sharing a basis can be nested,
    joined and compared without leaving the alpha coordinates.
    """

    directions: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    @property
    def sides(self) -> np.ndarray:
        return self.hi - self.lo

    def coordinates(self, points) -> np.ndarray:
        return np.linalg.solve(self.directions.T, np.asarray(points, dtype=float).T).T

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        alpha = self.coordinates(points)
        slack = tol * max(1.0, float(np.max(np.abs(self.hi))), float(np.max(np.abs(self.lo))))
        return np.all((alpha >= self.lo - slack) & (alpha <= self.hi + slack), axis=-1)

    def contains_box(self, other: "FrameBox", tol: float = 1e-9) -> bool:
        if not np.allclose(self.directions, other.directions, atol=1e-12):
            return bool(np.all(self.contains(other.vertices(), tol=tol)))
        slack = tol * max(1.0, float(np.max(np.abs(self.hi))))
        return bool(np.all(other.lo >= self.lo - slack) and np.all(other.hi <= self.hi + slack))

    def hull(self, other: "FrameBox") -> "FrameBox":
        return FrameBox(self.directions, np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def vertices(self) -> np.ndarray:
        corners = np.array(list(itertools.product((0.0, 1.0), repeat=len(self.lo))))
        return (self.lo + corners * self.sides) @ self.directions

    def to_parallelepiped(self) -> Parallelepiped:
        return Parallelepiped(self.lo @ self.directions, self.sides[:, None] * self.directions)


def minimal_frame_box(directions, center, radius: float, polytope: ConvexPolytope, anchor=None) -> Optional[FrameBox]:
    """
    Smallest box in the given edge directions containing ball(center, radius) intersected with polytope.

    With an anchor, the lower corner is pinned at the anchor in every
    direction where the region does not reach below it.
    """
    directions = np.asarray(directions, dtype=float)
    functionals = np.linalg.inv(directions.T)
    hi = np.array([support_ball_polytope(center, radius, polytope, f) for f in functionals])
    lo = -np.array([support_ball_polytope(center, radius, polytope, -f) for f in functionals])
    if not (np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))):
        return None
    if anchor is not None:
        lo = np.minimum(lo, functionals @ np.asarray(anchor, dtype=float))
    return FrameBox(directions, lo, hi)


def minimal_parallelepiped(directions, center, radius: float, polytope: ConvexPolytope, anchor=None) -> Optional[Parallelepiped]:
    box = minimal_frame_box(directions, center, radius, polytope, anchor=anchor)
    if box is None or np.any(box.sides <= EMPTY_TOL):
        return None
    return box.to_parallelepiped()


def sample_ball_polytope(center, radius: float, polytope: ConvexPolytope, n: int, rng: np.random.Generator, max_rounds: int = 200) -> np.ndarray:
    """Uniform points of the open ball intersected with the polytope, by rejection from the exact bounding box."""
    center = np.asarray(center, dtype=float)
    k = center.shape[0]
    eye = np.eye(k)
    hi = np.array([support_ball_polytope(center, radius, polytope, e) for e in eye])
    lo = -np.array([support_ball_polytope(center, radius, polytope, -e) for e in eye])
    if not np.all(np.isfinite(hi)):
        return np.zeros((0, k))

    accepted = []
    total = 0
    for _ in range(max_rounds):
        points = lo + (hi - lo) * rng.random((max(n, 1024), k))
        keep = (np.linalg.norm(points - center, axis=1) < radius) & polytope.contains(points, tol=0.0)
        accepted.append(points[keep])
        total += int(keep.sum())
        if total >= n:
            break
    return np.concatenate(accepted)[:n]


def diamond_slice_measure(z, r: float, t: float) -> float:
    """
    (d-1)-dimensional measure of D(z, r) on the hyperplane x1 + ... + xd = t.

    The slice is parametrized by u = (x1, ..., x_{d-1}) with xd = t - sum(u);
    the parametrization stretches volume by sqrt(d).
    """
    z = np.asarray(z, dtype=float)
    d = z.shape[0]
    z0 = float(z.sum())
    if t <= max(z0 - r, 0.0) or t >= z0 + r:
        return 0.0
    if d == 1:
        return 1.0 if abs(t - z[0]) < r else 0.0

    rows, rhs = [], []
    for signs in itertools.product((-1.0, 1.0), repeat=d):
        sigma = np.array(signs)
        rows.append(sigma[:-1] - sigma[-1])
        rhs.append(r + float(sigma @ z) - sigma[-1] * t)
    rows.extend(-np.eye(d - 1))
    rhs.extend([0.0] * (d - 1))
    rows.append(np.ones(d - 1))
    rhs.append(t)

    polytope = ConvexPolytope.from_halfspaces(np.array(rows), np.array(rhs))
    if polytope is None:
        return 0.0
    return math.sqrt(d) * polytope.volume
