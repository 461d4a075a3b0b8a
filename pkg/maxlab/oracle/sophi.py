"""
Parallelepiped cover of a diamond slice.

For a level t in (b, b + 2r) the slice D_t = D(z, r) on {x0 = t} and the
point xi_t are put inside a parallelepiped P_t of the level plane whose
edges are e_i - e_d. Points of the plane are written by their first d - 1
coordinates; P_t is then an axis-parallel box in those coordinates.
"""
import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from maxlab.config import get_settings
from maxlab.errors import DomainError
from maxlab.measure import mu_quadrature
from .configs import DiamondConfig, random_diamond_config, random_level
from .report import OracleReport, record_points, run_instances

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SliceCover:
    branch: str
    lo: np.ndarray
    hi: np.ndarray

    @property
    def sides(self) -> np.ndarray:
        return self.hi - self.lo

    def edges(self) -> np.ndarray:
        """Edge vectors of P_t in the full space, one row per side."""
        d = len(self.lo) + 1
        rows = np.zeros((d - 1, d))
        rows[:, :-1] = np.eye(d - 1)
        rows[:, -1] = -1.0
        return self.sides[:, None] * rows

    @property
    def log_volume(self) -> float:
        """log of the (d-1)-dimensional measure in the level plane."""
        return 0.5 * math.log(len(self.lo) + 1) + float(np.sum(np.log(self.sides)))

    def contains(self, heads, tol: float = 1e-9) -> np.ndarray:
        slack = tol * max(1.0, float(np.max(np.abs(self.hi))))
        return np.all((heads > self.lo - slack) & (heads < self.hi + slack), axis=-1)


def slice_cover(cfg: DiamondConfig, t: float) -> SliceCover:
    """
    P_t for the level t.

    When sum_{i<d} z_i >= r - h the sides are bounded through y = z - x +
    (h + delta)/2; otherwise through y = x + delta, which uses the height of
    the diamond's bottom instead of r.
    """
    if not cfg.b < t < cfg.b + 2 * cfg.r:
        raise DomainError(f"t = {t} is outside ({cfg.b}, {cfg.b + 2 * cfg.r})")
    d = cfg.d
    z = np.array(cfg.z[:-1])
    h = t - cfg.b
    gap = abs(t - cfg.xi0)
    top = z + (h + gap) / 2
    if z.sum() >= cfg.r - h:
        sides = np.minimum(z + (h + 3 * gap) / 2, cfg.r - h + d * (h + gap) / 2)
        return SliceCover("paral", top - sides, top)
    sides = np.minimum(z + (h + 3 * gap) / 2, cfg.b + h + d * gap)
    return SliceCover("addit", np.full(d - 1, -gap), sides - gap)


def _sample_slices(cfg: DiamondConfig, t: float, n: int, rng: np.random.Generator):
    """
    Points of D_t and of the larger set G (coordinates above -delta, l1 distance to z below r + delta).

    Returns the heads (first d - 1 coordinates) of both samples.
    """
    d = cfg.d
    z = np.array(cfg.z)
    gap = abs(t - cfg.xi0)
    h = t - cfg.b
    lo = np.maximum(-gap, z[:-1] + h - cfg.r - (d - 1) * (h + gap) / 2)
    hi = z[:-1] + (h + gap) / 2
    in_D, in_G = [], []
    total = 0
    for _ in range(1000):
        heads = lo + (hi - lo) * rng.random((n, d - 1))
        points = np.column_stack([heads, t - heads.sum(axis=1)])
        dist = np.abs(points - z).sum(axis=1)
        g = np.all(points > -gap, axis=1) & (dist < cfg.r + gap)
        dd = np.all(points > 0, axis=1) & (dist < cfg.r)
        in_G.append(heads[g])
        in_D.append(heads[dd])
        total += int(g.sum())
        if total >= n:
            break
    return np.concatenate(in_D)[:n], np.concatenate(in_G)[:n]


def sophi_check(cfg: DiamondConfig, t: float, seed: int = None, samples: int = None) -> OracleReport:
    """
    Certify D_t and xi_t inside P_t and record the constant of its volume bound.

    The constant is lambda_t(P_t) / ([1 + (t-b) v (xi0-b)]^{d-1} e^b mu(D)),
    evaluated in the log domain with mu(D) by quadrature.
    """
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    samples = settings.oracle.containment_samples if samples is None else samples
    rng = np.random.default_rng(seed)
    cover = slice_cover(cfg, t)
    d = cfg.d

    heads_D, heads_G = _sample_slices(cfg, t, samples, rng)
    outside = np.concatenate([heads_D[~cover.contains(heads_D)], heads_G[~cover.contains(heads_G)]])
    xi_t = np.array(cfg.xi) + (t - cfg.xi0) / d
    xi_inside = bool(cover.contains(xi_t[None, :-1])[0])
    violations = len(outside) + (0 if xi_inside else 1)
    points = [np.append(p, t - p.sum()) for p in outside]
    if not xi_inside:
        points.insert(0, xi_t)

    log_mu = mu_quadrature(cfg.ball).log_value
    spread = max(t - cfg.b, cfg.xi0 - cfg.b)
    log_constant = cover.log_volume - (d - 1) * math.log1p(spread) - cfg.b - log_mu
    constant = math.exp(log_constant)
    logger.debug("sophi d=%d t=%.4f branch=%s constant=%.4g", d, t, cover.branch, constant)
    return OracleReport(
        lemma="sophi",
        config={**cfg.to_dict(), "t": t, "seed": seed},
        samples=len(heads_D) + len(heads_G),
        violations=violations,
        envelope_min=constant,
        envelope_max=constant,
        details={
            "branch": cover.branch,
            "lo": cover.lo.tolist(),
            "hi": cover.hi.tolist(),
            "edges": cover.edges().tolist(),
            "log_volume": cover.log_volume,
            "log_mu": log_mu,
            "log_constant": log_constant,
            "slice_samples": len(heads_D),
        },
        violating_points=record_points(points),
    )


def sophi_sweep(d: int, instances: int = None, seed: int = None, samples: int = None, threads: int = 1) -> List[OracleReport]:
    settings = get_settings()
    instances = settings.oracle.instances if instances is None else instances
    seed = settings.seed if seed is None else seed

    def check(rng):
        cfg = random_diamond_config(d, rng)
        return sophi_check(cfg, random_level(cfg, rng), seed=int(rng.integers(2 ** 31)), samples=samples)

    return run_instances(check, instances, seed, threads)
