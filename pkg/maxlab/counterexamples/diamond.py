"""
Diamond witness: a normalized bump near (0, ..., 0, N) whose diamond maximal
function stays above N^{1-d} e^N on a set of measure about log(N) / lambda.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gammaln

from maxlab.config import get_settings
from maxlab.errors import DomainError, InputError
from maxlab.geometry import Ball, NormKind, norm
from maxlab.geometry.balls import MAX_DIM
from maxlab.measure import MeasureEstimate, MeasureMethod, mu_cube_exact, mu_quadrature, run_batches

logger = logging.getLogger(__name__)

MIN_N = 8.0


@dataclass(frozen=True)
class DiamondWitness:
    N: float
    d: int
    eps: float

    def __post_init__(self):
        if not 2 <= self.d <= MAX_DIM:
            raise DomainError(f"The witness needs 2 <= d <= {MAX_DIM}, got {self.d}")
        if not self.N >= MIN_N:
            raise DomainError(f"N must be at least {MIN_N}, got {self.N}")
        if not 0 < self.eps <= 0.01 * self.N:
            raise DomainError(f"eps must lie in (0, 0.01 N], got {self.eps}")

    @property
    def log_level(self) -> float:
        """log of lambda = N^{1-d} e^N."""
        return self.N - (self.d - 1) * math.log(self.N)

    @property
    def support_center(self) -> np.ndarray:
        center = np.full(self.d, self.eps)
        center[-1] = self.N
        return center

    @property
    def log_support_measure(self) -> float:
        return mu_cube_exact(self.support_center, self.eps).log_value

    @property
    def log_density(self) -> float:
        """log of the value of f on its support; f has unit mass."""
        return -self.log_support_measure

    def support_corners(self) -> np.ndarray:
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * self.d, indexing="ij")).reshape(self.d, -1).T
        return self.support_center + self.eps * signs

    def lower_bound_log(self, xi) -> np.ndarray:
        """
        log of e^s / (1 + s - xi_d)^{d-1} with s = |xi|_1.

        Defined on the open orthant below the level s = N; -inf elsewhere.
        """
        xi = np.asarray(xi, dtype=float)
        if xi.shape[-1] != self.d:
            raise InputError(f"Point dimension {xi.shape[-1]} does not match witness dimension {self.d}")
        s = xi.sum(axis=-1)
        sigma = s - xi[..., -1]
        value = s - (self.d - 1) * np.log1p(sigma)
        valid = np.all(xi > 0, axis=-1) & (s < self.N)
        return np.where(valid, value, -np.inf)

    def in_level_set(self, xi, c: float) -> np.ndarray:
        return self.lower_bound_log(xi) >= math.log(c) + self.log_level

    def sample_admissible(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """
        Points with s in (N - (d-1) log N, N) and xi_i < N e^{(s-N)/(d-1)} / d for i < d.
        """
        d, N = self.d, self.N
        chunks, total = [], 0
        while total < n:
            s = N - (d - 1) * math.log(N) * rng.random(n)
            cap = N * np.exp((s - N) / (d - 1)) / d
            head = cap[:, None] * rng.random((n, d - 1))
            tail = s - head.sum(axis=1)
            keep = (tail > 0) & np.all(head > 0, axis=1)
            chunks.append(np.column_stack([head, tail])[keep])
            total += int(keep.sum())
        return np.concatenate(chunks)[:n]

    def certificate_ball(self, xi) -> Ball:
        """Diamond through xi whose center sits M = N + s + 1 above it and which swallows the support."""
        xi = np.asarray(xi, dtype=float)
        s = float(xi.sum())
        M = self.N + s + 1
        center = xi.copy()
        center[-1] += M
        radius = M + max(0.0, s - self.N) + 2 * self.d * self.eps
        return Ball.of(NormKind.L1, center, radius)


def diamond_witness(N: float, d: int, eps: float = None) -> DiamondWitness:
    eps = get_settings().counterexamples.dirac_eps if eps is None else eps
    return DiamondWitness(float(N), int(d), float(eps))


def _profile(w: DiamondWitness, c: float):
    """(lower end, g) of the level set: on the shell |xi|_1 = s it is {sigma <= g(s)}."""
    log_cut = math.log(c) + w.log_level
    k = w.d - 1

    def g(s):
        return np.expm1((s - log_cut) / k)

    return max(log_cut, 0.0), g


def _functional_quadrature(w: DiamondWitness, c: float) -> MeasureEstimate:
    lo, g = _profile(w, c)
    k = w.d - 1
    log_fact = gammaln(w.d)
    points = []
    if g(w.N) > w.N and g(lo) < lo:
        points.append(brentq(lambda s: g(s) - s, lo, w.N, xtol=1e-14))

    def integrand(s):
        m = min(s, float(g(s)))
        return math.exp(-(s - lo) + k * math.log(m) - log_fact) if m > 0 else 0.0

    value, _ = quad(integrand, lo, w.N, points=points or None, epsabs=0.0, epsrel=1e-10, limit=200)
    if value <= 0:
        return MeasureEstimate(-math.inf, MeasureMethod.QUADRATURE, zero_hits=True)
    return MeasureEstimate(w.log_level - lo + math.log(value), MeasureMethod.QUADRATURE)


def _functional_montecarlo(w: DiamondWitness, c: float, n: int, seed: int, threads: int, batches: int) -> MeasureEstimate:
    lo, g = _profile(w, c)
    k = w.d - 1
    keep = -math.expm1(-(w.N - lo))
    log_fact = gammaln(w.d)

    def work(rng, size):
        s = lo - np.log1p(-rng.random(size) * keep)
        sigma = s * (1.0 - rng.dirichlet(np.ones(w.d), size)[:, -1])
        hits = sigma <= g(s)
        return float(np.sum(np.exp(k * np.log(s[hits]) - log_fact)))

    mean, stderr = run_batches(work, n, seed, batches=batches, threads=threads)
    if mean == 0:
        return MeasureEstimate(-math.inf, MeasureMethod.MONTECARLO, math.inf, n, zero_hits=True)
    log_value = w.log_level - lo + math.log(keep) + math.log(mean)
    return MeasureEstimate(log_value, MeasureMethod.MONTECARLO, stderr / mean, n)


def diamond_weak_functional(w: DiamondWitness, c: float = None, method: str = "quadrature", n: int = None, seed: int = None, threads: int = None) -> MeasureEstimate:
    """
    log of lambda * mu{xi : lower bound(xi) >= c * lambda}; f has unit mass.

    The level set is integrated shell by shell in s = |xi|_1: on each shell
    it is a simplex in (xi_1, ..., xi_{d-1}) of side min(s, g(s)). An empty
    level set comes back as -inf with the zero_hits flag.

    Args:
        w: the witness
        c: level constant in (0, 1]
        method: "quadrature" or "montecarlo" (truncated exponential in s, Dirichlet on the shell)
        n: Monte Carlo sample count

    Returns:
        MeasureEstimate holding log F
    """
    settings = get_settings()
    c = settings.counterexamples.level_constant if c is None else c
    if not 0 < c <= 1:
        raise DomainError(f"Level constant must lie in (0, 1], got {c}")
    if math.log(c) + w.log_level >= w.N:
        logger.warning("Empty level set for N=%s, d=%d, c=%s", w.N, w.d, c)
        return MeasureEstimate(-math.inf, MeasureMethod.QUADRATURE, zero_hits=True)
    if method == "quadrature":
        result = _functional_quadrature(w, c)
    elif method == "montecarlo":
        seed = settings.seed if seed is None else seed
        result = _functional_montecarlo(
            w, c, n or settings.measure.mc_samples, seed, threads or settings.threads, settings.measure.mc_batches
        )
    else:
        raise InputError(f"Unknown method for the weak functional: {method}")
    logger.info("diamond functional N=%s d=%d c=%s: log F = %.6f (%s)", w.N, w.d, c, result.log_value, result.method.value)
    return result


@dataclass(frozen=True)
class DiamondCertificate:
    xi: tuple
    log_diamond_measure: float
    log_bound: float
    contains_support: bool

    @property
    def ratio(self) -> float:
        """e^{-s} (1 + sigma)^{d-1} / mu(D); bounded away from 0 when the lower bound holds."""
        return math.exp(self.log_bound - self.log_diamond_measure)

    def to_dict(self) -> dict:
        return {
            "xi": list(self.xi),
            "log_diamond_measure": self.log_diamond_measure,
            "log_bound": self.log_bound,
            "contains_support": self.contains_support,
            "ratio": self.ratio,
        }


def diamond_certificates(w: DiamondWitness, samples: int = 10, seed: Optional[int] = None, tol: float = None) -> List[DiamondCertificate]:
    """Measure the certificate diamond by quadrature at sampled admissible points."""
    seed = get_settings().seed if seed is None else seed
    rng = np.random.default_rng(seed)
    rows = []
    for xi in w.sample_admissible(samples, rng):
        ball = w.certificate_ball(xi)
        corners = w.support_corners()
        inside = bool(np.all(norm(corners - ball.center.as_array(), NormKind.L1) < ball.radius))
        log_mu = mu_quadrature(ball, tol).log_value
        rows.append(DiamondCertificate(tuple(float(v) for v in xi), log_mu, -float(w.lower_bound_log(xi)), inside))
    return rows
