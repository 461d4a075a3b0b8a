import logging
import math

import numpy as np

from maxlab.config import get_settings
from maxlab.errors import CapabilityError, DomainError
from maxlab.geometry import Ball, NormKind
from .estimates import DoublingReport, EnvelopeReport, MeasureEstimate, resolve_alpha
from .exact import asymptotic_prediction, mu_cube_exact
from .montecarlo import mu_montecarlo
from .quadrature import mu_quadrature

logger = logging.getLogger(__name__)


def best_method(ball: Ball, alpha=None) -> str:
    if ball.kind is NormKind.LINF:
        return "exact"
    if resolve_alpha(alpha, ball.dim) is not None:
        return "montecarlo"
    if ball.kind is NormKind.L1 or ball.dim <= 2:
        return "quadrature"
    return "montecarlo"


def measure_ball(ball: Ball, method: str = "best", alpha=None, tol: float = None, n: int = None, seed: int = None, threads: int = None) -> MeasureEstimate:
    """Measure a ball with the requested method ("best" picks exact, then quadrature, then Monte Carlo)."""
    if method == "best":
        method = best_method(ball, alpha)

    if method == "exact":
        if ball.kind is not NormKind.LINF:
            raise CapabilityError(f"No closed form for {ball.kind.value} balls")
        return mu_cube_exact(ball.center, ball.radius, alpha)
    if method == "quadrature":
        if resolve_alpha(alpha, ball.dim) is not None:
            raise CapabilityError("Slice quadrature covers the plain measure only")
        return mu_quadrature(ball, tol)
    if method == "montecarlo":
        return mu_montecarlo(ball, alpha=alpha, n=n, seed=seed, threads=threads)
    raise CapabilityError(f"Unknown measure method: {method}")


def doubling_ratio(kind, x, r: float, **options) -> float:
    """mu(ball(x, 2r)) / mu(ball(x, r)) in the linear domain."""
    if not r > 0:
        raise DomainError(f"Radius must be positive, got {r}")
    small = measure_ball(Ball.of(kind, x, r), **options)
    large = measure_ball(Ball.of(kind, x, 2 * r), **options)
    return math.exp(large.log_value - small.log_value)


def doubling_sweep(kind, d: int, radius_cap: float = 1.0, grid: int = 20, x_max: float = 10.0, **options) -> DoublingReport:
    """Largest doubling ratio over diagonal centers t*(1,...,1) and radii up to radius_cap."""
    kind = NormKind.parse(kind)
    best = (0.0, None, None)
    evaluations = 0
    for t in np.linspace(x_max / grid, x_max, grid):
        for r in np.linspace(radius_cap / grid, radius_cap, grid):
            center = (float(t),) * d
            ratio = doubling_ratio(kind, center, float(r), **options)
            evaluations += 1
            if ratio > best[0]:
                best = (ratio, center, float(r))
    logger.info("doubling sweep %s d=%d R=%s: max ratio %.4f", kind.value, d, radius_cap, best[0])
    return DoublingReport(kind.value, d, radius_cap, best[0], best[1], best[2], evaluations)


def envelope_sweep(kind, d: int, configs: int = 100, seed: int = None, x_max: float = 20.0, **options) -> EnvelopeReport:
    """
    Ratio of measured to predicted measure over random interior balls.

    Centers are uniform in (1, x_max)^d and radii uniform in (1, min x).
    """
    kind = NormKind.parse(kind)
    seed = get_settings().seed if seed is None else seed
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(configs):
        center = rng.uniform(1.0, x_max, size=d)
        r = float(rng.uniform(1.0, center.min()))
        ball = Ball.of(kind, center, r)
        measured = measure_ball(ball, **options)
        ratios.append((math.exp(measured.log_value - asymptotic_prediction(ball)), center, r))

    values = np.array([item[0] for item in ratios])
    worst = ratios[int(values.argmax())]
    report = EnvelopeReport(
        kind=kind.value,
        d=d,
        configs=configs,
        c1=float(values.min()),
        c2=float(values.max()),
        seed=seed,
        worst={"center": worst[1].tolist(), "radius": worst[2], "ratio": worst[0]},
    )
    logger.info("envelope sweep %s d=%d: c1=%.4g c2=%.4g", kind.value, d, report.c1, report.c2)
    return report
