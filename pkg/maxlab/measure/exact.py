import logging
import math
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import gammainc, gammaincc, gammaln

from maxlab.errors import DomainError
from maxlab.geometry import Ball, NormKind, PointPlus
from .estimates import LaguerreParams, MeasureEstimate, MeasureMethod, resolve_alpha

logger = logging.getLogger(__name__)


def log_interval_mass(lo: float, hi: float, alpha: float = 0.0) -> float:
    """
    log of the integral of x^alpha e^{-x} over (lo, hi), 0 <= lo < hi.

    alpha = 0 is closed form; otherwise the difference of regularized
    incomplete gamma functions is taken on the side where it does not cancel.
    """
    if hi <= lo:
        return -math.inf
    if alpha == 0:
        return -lo + math.log(-math.expm1(-(hi - lo)))

    a = alpha + 1.0
    if lo > a:
        big, small = gammaincc(a, lo), gammaincc(a, hi)
    else:
        big, small = gammainc(a, hi), gammainc(a, lo)
    if big > 0 and small < big:
        return gammaln(a) + math.log(big) + math.log1p(-small / big)

    # both tails underflow: integrate the shifted density instead
    value, _ = quad(lambda u: (lo + u) ** alpha * math.exp(-u), 0.0, hi - lo, epsrel=1e-12, limit=200)
    return -lo + math.log(value)


def mu_cube_exact(x, r: float, alpha=None) -> MeasureEstimate:
    """
    Exact log measure of the cube Q(x, r) truncated to the positive orthant.

    Args:
        x: center, a PointPlus or a sequence of positive coordinates
        r: half side, positive
        alpha: optional Laguerre exponents (one per coordinate)

    Returns:
        MeasureEstimate with method exact
    """
    if not isinstance(x, PointPlus):
        x = PointPlus(tuple(np.atleast_1d(x)))
    if not r > 0:
        raise DomainError(f"Radius must be positive, got {r}")
    params = resolve_alpha(alpha, x.dim)
    exponents = params.alpha if params else (0.0,) * x.dim

    log_value = 0.0
    for xi, ai in zip(x.coords, exponents):
        log_value += log_interval_mass(max(0.0, xi - r), xi + r, ai)
    return MeasureEstimate(log_value, MeasureMethod.EXACT)


def asymptotic_prediction(ball: Ball, alpha=None) -> float:
    """Log of the two-sided envelope for the measure of an interior ball with 1 <= r <= min x."""
    x = ball.center.as_array()
    r = ball.radius
    d = ball.dim
    if not 1 <= r <= x.min():
        raise DomainError(f"Envelope needs 1 <= r <= min(x), got r={r}, min(x)={x.min()}")

    x0 = float(x.sum())
    if ball.kind is NormKind.LINF:
        value = -(x0 - d * r)
    elif ball.kind is NormKind.L2:
        value = -(x0 - math.sqrt(d) * r) + 0.5 * (d - 1) * math.log(r)
    else:
        value = -(x0 - r) + (d - 1) * math.log(r)

    params: Optional[LaguerreParams] = resolve_alpha(alpha, d)
    if params:
        value += float(np.dot(params.alpha, np.log(x)))
    return value
