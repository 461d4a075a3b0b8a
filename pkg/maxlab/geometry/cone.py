import itertools
import logging
import math

import numpy as np
from scipy.linalg import helmert

from maxlab.errors import DomainError, InputError

logger = logging.getLogger(__name__)

TOL = 1e-12


class ConeFrame:
    """
    Rotation taking the diagonal (1,...,1)/sqrt(d) to the first axis.

    The image of the positive orthant is the cone C+ = {y : y @ Q > 0}; the
    columns of Q are both the edge rays of C+ and the inward normals of its
    faces. Cross-sections at height x1 = level are regular simplices.
    """

    def __init__(self, d: int):
        if not 1 <= d <= 4:
            raise InputError(f"Cone dimension must be between 1 and 4, got {d}")
        self.d = d
        Q = helmert(d, full=True) if d > 1 else np.ones((1, 1))
        if np.linalg.det(Q) < 0:
            Q[-1] *= -1
        self.rotation = Q

    def rotate(self, p) -> np.ndarray:
        return np.asarray(p, dtype=float) @ self.rotation.T

    def inverse(self, y) -> np.ndarray:
        return np.asarray(y, dtype=float) @ self.rotation

    @property
    def edge_rays(self) -> np.ndarray:
        """Rows are the unit edge directions of C+ (images of e_k)."""
        return self.rotation.T.copy()

    face_normals = edge_rays

    def contains(self, y, closed: bool = False, tol: float = TOL) -> np.ndarray:
        coords = np.asarray(y, dtype=float) @ self.rotation
        if closed:
            scale = max(1.0, float(np.max(np.abs(coords))))
            return np.all(coords >= -tol * scale, axis=-1)
        return np.all(coords > 0, axis=-1)

    def section_vertices(self, level: float) -> np.ndarray:
        """Vertices (full d-dimensional points) of the cross-section x1 = level."""
        return level * math.sqrt(self.d) * self.edge_rays

    def section_side(self, level: float) -> float:
        return level * math.sqrt(2 * self.d)

    def section_halfspaces(self, level: float):
        """(A, b) with the open cross-section in x' coordinates equal to {A x' < b}."""
        Q = self.rotation
        return -Q[1:, :].T, level * Q[0, :]

    def active_faces(self, y, tol: float = 1e-9) -> tuple:
        """Indices k of the faces of C+ containing y (up to tol relative to |y|)."""
        coords = np.asarray(y, dtype=float) @ self.rotation
        scale = max(1.0, float(np.linalg.norm(y)))
        return tuple(int(k) for k in np.flatnonzero(np.abs(coords) <= tol * scale))


def cone_rotate(frame: ConeFrame, p) -> np.ndarray:
    return frame.rotate(p)


def cone_unrotate(frame: ConeFrame, y) -> np.ndarray:
    return frame.inverse(y)


def bottom_point(frame: ConeFrame, m, r: float) -> np.ndarray:
    """
    Lowest point (minimal x1) of the closure of B(m, r) intersected with C+.

    Every subset of faces is tried: the ball is cut by the linear span of
    the face intersection and the lowest point of the resulting sphere is
    kept when it lies in the closed cone.

    Args:
        frame: cone frame of dimension d
        m: ball center, must lie in the open cone
        r: ball radius

    Returns:
        the bottom point a as an array of length d
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (frame.d,):
        raise InputError(f"Center must have dimension {frame.d}")
    if r <= 0:
        raise DomainError(f"Radius must be positive, got {r}")
    if not frame.contains(m):
        raise DomainError(f"Center {m} is not inside the cone")

    d = frame.d
    normals = frame.face_normals
    e1 = np.zeros(d)
    e1[0] = 1.0
    candidates = []

    for size in range(d + 1):
        for faces in itertools.combinations(range(d), size):
            if size == 0:
                P = np.eye(d)
            else:
                N = normals[list(faces)]
                P = np.eye(d) - N.T @ np.linalg.solve(N @ N.T, N)
            m_p = P @ m
            dist2 = float(np.sum((m - m_p) ** 2))
            if dist2 > r * r:
                continue
            down = P @ e1
            length = np.linalg.norm(down)
            if length < TOL:
                candidate = m_p
            else:
                candidate = m_p - math.sqrt(r * r - dist2) * down / length
            if frame.contains(candidate, closed=True, tol=1e-10):
                candidates.append(candidate)

    # the apex candidate always exists when the ball reaches the origin, so
    # the list is never empty for a center inside the cone
    best_x1 = min(c[0] for c in candidates)
    lowest = [c for c in candidates if c[0] <= best_x1 + 1e-12 * max(1.0, abs(best_x1))]
    a = min(lowest, key=lambda c: tuple(c))
    logger.debug("bottom point of B(%s, %s): %s", m, r, a)
    return a
