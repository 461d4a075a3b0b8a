import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Tuple

import numpy as np

from maxlab.config import get_settings
from maxlab.errors import DomainError, InputError
from maxlab.geometry import diagonal_frame
from .estimates import MeasureEstimate, MeasureMethod, resolve_alpha

logger = logging.getLogger(__name__)

MIN_SAMPLES = 1000
CHUNK = 250_000

Sampler = Callable[[np.random.Generator, int], np.ndarray]


def run_batches(work: Callable[[np.random.Generator, int], float], n: int, seed: int, batches: int = 32, threads: int = 1) -> Tuple[float, float]:
    """
    Split n draws into independent seeded batches and return (mean, stderr) of work/size.

    Batch k always gets the k-th child of SeedSequence(seed), whatever the
    number of threads, so results do not depend on the worker count.
    """
    if n < batches:
        raise InputError(f"Need at least {batches} samples, got {n}")
    children = np.random.SeedSequence(seed).spawn(batches)
    sizes = [n // batches + (1 if k < n % batches else 0) for k in range(batches)]

    def run(job):
        child, size = job
        return work(np.random.default_rng(child), size)

    jobs = list(zip(children, sizes))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sums = np.array(list(pool.map(run, jobs)))
    else:
        sums = np.array([run(job) for job in jobs])

    batch_means = sums / np.array(sizes)
    mean = float(sums.sum() / n)
    stderr = float(batch_means.std(ddof=1) / math.sqrt(batches))
    return mean, stderr


def box_proposal(region) -> Tuple[Sampler, float]:
    """Product of truncated exponentials on the bounding box; returns (sampler, log mass of the box)."""
    lo, hi = region.bounding_box()
    lo = np.asarray(lo, dtype=float)
    width = np.asarray(hi, dtype=float) - lo
    keep = -np.expm1(-width)
    log_mass = float(np.sum(-lo + np.log(keep)))

    def draw(rng, size):
        u = rng.random((size, lo.shape[0]))
        return lo - np.log1p(-u * keep)

    return draw, log_mass


def slab_proposal(region) -> Tuple[Sampler, float]:
    """
    Truncated exponential along the diagonal times uniform transverse coordinates.

    Points are x = (t/d) 1 + eta @ U with U the orthonormal frame of the
    hyperplane orthogonal to 1; the volume element is dt deta / sqrt(d).
    """
    d = region.dim
    slab = region.slab_bounds()
    U = diagonal_frame(d)
    delta = slab.t_hi - slab.t_lo
    keep = -math.expm1(-delta)
    widths = np.asarray(slab.half_widths, dtype=float)
    centers = np.asarray(slab.centers, dtype=float)
    log_mass = -slab.t_lo + math.log(keep) + float(np.sum(np.log(2 * widths))) - 0.5 * math.log(d)

    def draw(rng, size):
        t = slab.t_lo - np.log1p(-rng.random(size) * keep)
        eta = centers + widths * (2 * rng.random((size, d - 1)) - 1)
        return t[:, None] / d + eta @ U

    return draw, log_mass


PROPOSALS = {"box": box_proposal, "slab": slab_proposal}


def mu_montecarlo(region, alpha=None, n: int = None, seed: int = None, proposal: str = "auto", threads: int = None, batches: int = None) -> MeasureEstimate:
    """
    Importance-sampled estimate of the (Laguerre) measure of a region.

    The region needs `dim`, `contains(points)` and either `bounding_box()`
    or `slab_bounds()` depending on the proposal.
    """
    settings = get_settings()
    n = n or settings.measure.mc_samples
    seed = settings.seed if seed is None else seed
    threads = threads or settings.threads
    batches = batches or settings.measure.mc_batches
    if n < MIN_SAMPLES:
        raise DomainError(f"Monte Carlo needs at least {MIN_SAMPLES} samples, got {n}")

    if proposal == "auto":
        proposal = getattr(region, "preferred_proposal", "box")
    if proposal not in PROPOSALS:
        raise InputError(f"Unknown proposal: {proposal}")
    draw, log_mass = PROPOSALS[proposal](region)
    params = resolve_alpha(alpha, region.dim)
    exponents = np.array(params.alpha) if params else None

    def work(rng, size):
        total = 0.0
        done = 0
        while done < size:
            chunk = min(CHUNK, size - done)
            points = draw(rng, chunk)
            hits = region.contains(points)
            if exponents is None:
                total += float(hits.sum())
            else:
                total += float(np.exp(np.log(points[hits]) @ exponents).sum())
            done += chunk
        return total

    mean, stderr = run_batches(work, n, seed, batches=batches, threads=threads)
    if mean == 0:
        logger.warning("Monte Carlo: zero hits in %d samples (%s proposal)", n, proposal)
        return MeasureEstimate(-math.inf, MeasureMethod.MONTECARLO, math.inf, n, zero_hits=True)
    return MeasureEstimate(log_mass + math.log(mean), MeasureMethod.MONTECARLO, stderr / mean, n)
