import itertools
import logging
import math

import numpy as np
from scipy.integrate import quad

from maxlab.config import get_settings
from maxlab.errors import CapabilityError, DomainError
from maxlab.geometry import Ball, ConvexPolytope, NormKind, diamond_slice_measure
from .estimates import MeasureEstimate, MeasureMethod

logger = logging.getLogger(__name__)


def diamond_levels(z, r: float) -> np.ndarray:
    """Sorted distinct values of x1 + ... + xd at the vertices of D(z, r) in the orthant."""
    z = np.asarray(z, dtype=float)
    d = z.shape[0]
    if d == 1:
        return np.array([max(z[0] - r, 0.0), z[0] + r])
    rows, rhs = [], []
    for signs in itertools.product((-1.0, 1.0), repeat=d):
        sigma = np.array(signs)
        rows.append(sigma)
        rhs.append(r + float(sigma @ z))
    rows.extend(-np.eye(d))
    rhs.extend([0.0] * d)
    polytope = ConvexPolytope.from_halfspaces(np.array(rows), np.array(rhs))
    if polytope is None:
        return np.array([])
    return np.unique(np.round(polytope.vertices.sum(axis=1), 12))


def _integrate_pieces(integrand, levels, tol: float) -> float:
    """log of the integral of e^{-t} * integrand(t) over consecutive level pieces."""
    if len(levels) < 2:
        return -math.inf
    t0 = float(levels[0])
    total = 0.0
    for a, b in zip(levels[:-1], levels[1:]):
        value, _ = quad(lambda t: math.exp(-(t - t0)) * integrand(t), a, b, epsabs=0.0, epsrel=tol, limit=200)
        total += value
    return math.log(total) - t0 if total > 0 else -math.inf


def _l2_planar_chord(a: float, b: float, r: float, t: float) -> float:
    """Length in x of the slice {x + y = t} of the disc B((a, b), r) inside the quadrant."""
    disc = 2 * r * r - (t - a - b) ** 2
    if disc <= 0:
        return 0.0
    s = math.sqrt(disc)
    lo = max((a + t - b - s) / 2, 0.0)
    hi = min((a + t - b + s) / 2, t)
    return max(hi - lo, 0.0)


def mu_quadrature(ball: Ball, tol: float = None) -> MeasureEstimate:
    """
    Log measure by integrating e^{-t} against the slice measure on {x1 + ... + xd = t}.

    Supported: diamonds in every dimension, Euclidean balls for d <= 2, any
    kind for d = 1 (all balls are intervals there).
    """
    tol = tol or get_settings().measure.quad_tol
    if not tol > 0:
        raise DomainError(f"Quadrature tolerance must be positive, got {tol}")
    d = ball.dim
    z = ball.center.as_array()
    r = ball.radius

    if ball.kind is NormKind.L1 or d == 1:
        levels = diamond_levels(z, r)
        scale = math.sqrt(d)
        log_value = _integrate_pieces(lambda t: diamond_slice_measure(z, r, t) / scale, levels, tol)
    elif ball.kind is NormKind.L2 and d == 2:
        a, b = z
        half = math.sqrt(2) * r
        cuts = [max(a + b - half, 0.0), a + b + half]
        if r > b:
            cuts += [a - math.sqrt(r * r - b * b), a + math.sqrt(r * r - b * b)]
        if r > a:
            cuts += [b - math.sqrt(r * r - a * a), b + math.sqrt(r * r - a * a)]
        levels = np.unique([c for c in cuts if cuts[0] <= c <= cuts[1]])
        log_value = _integrate_pieces(lambda t: _l2_planar_chord(a, b, r, t), levels, tol)
    else:
        raise CapabilityError(f"No slice quadrature for {ball.kind.value} balls in dimension {d}")

    logger.debug("quadrature measure of %s: %s", ball, log_value)
    return MeasureEstimate(log_value, MeasureMethod.QUADRATURE)
