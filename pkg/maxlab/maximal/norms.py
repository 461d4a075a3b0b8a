import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from maxlab.errors import DomainError, InputError
from .grid import GridFunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeakTypeReport:
    """Level-set measures of Mf against the L1 norm of f, all in log-domain."""

    lambdas: Tuple[float, ...]
    level_log_measures: Tuple[float, ...]
    f_l1_log: float
    functional_log: float

    @property
    def functional(self) -> float:
        return math.exp(self.functional_log)

    def to_dict(self) -> dict:
        return {
            "lambdas": list(self.lambdas),
            "level_log_measures": list(self.level_log_measures),
            "f_l1_log": self.f_l1_log,
            "functional_log": self.functional_log,
        }


@dataclass(frozen=True)
class NormReport:
    p: float
    log_lp_ratio: float
    weak: WeakTypeReport

    @property
    def lp_ratio(self) -> float:
        return math.exp(self.log_lp_ratio)


def log_lp_power(g: GridFunction, p: float) -> float:
    """log of the integral of g^p against the exponential measure (cell midpoint rule)."""
    values = g.values.ravel()
    positive = values > 0
    if not np.any(positive):
        return -math.inf
    log_mass = g.log_cell_measure().ravel()[positive]
    return float(logsumexp(p * np.log(values[positive]) + log_mass))


def weak_type_report(f: GridFunction, Mf: GridFunction, lambdas: Optional[Sequence[float]] = None) -> WeakTypeReport:
    """
    sup over levels of lambda * mu{Mf > lambda} / |f|_1.

    Without explicit levels every attained value v of Mf is used with the
    set {Mf >= v}, the limit of {Mf > lambda} as lambda increases to v.
    """
    f_l1_log = log_lp_power(f, 1.0)
    if not math.isfinite(f_l1_log):
        raise DomainError("f vanishes identically")
    mf = Mf.values.ravel()
    log_mass = Mf.log_cell_measure().ravel()

    if lambdas is None:
        order = np.argsort(-mf, kind="stable")
        sorted_mf = mf[order]
        cumulative = np.logaddexp.accumulate(log_mass[order])
        levels = np.unique(sorted_mf[sorted_mf > 0])[::-1]
        last = np.searchsorted(-sorted_mf, -levels, side="right") - 1
        level_logs = cumulative[last]
        levels, level_logs = levels[::-1], level_logs[::-1]
    else:
        levels = np.sort(np.asarray(lambdas, dtype=float))
        if np.any(levels <= 0):
            raise DomainError("Levels must be positive")
        level_logs = np.array(
            [float(logsumexp(log_mass[mf > lam])) if np.any(mf > lam) else -math.inf for lam in levels]
        )

    if len(levels) == 0:
        return WeakTypeReport((), (), f_l1_log, -math.inf)
    functional_log = float(np.max(np.log(levels) + level_logs)) - f_l1_log
    return WeakTypeReport(tuple(levels.tolist()), tuple(level_logs.tolist()), f_l1_log, functional_log)


def norms_and_weak(f: GridFunction, Mf: GridFunction, p: float, lambdas: Optional[Sequence[float]] = None) -> NormReport:
    """
    |Mf|_p / |f|_p under the exponential measure plus the weak-type report.

    Args:
        f: input grid function, not identically zero
        Mf: maximal function on the same grid
        p: exponent, at least 1
        lambdas: optional explicit levels for the weak report

    Returns:
        NormReport with the log ratio and the weak-type report
    """
    if p < 1:
        raise DomainError(f"p must be at least 1, got {p}")
    if not f.same_geometry(Mf):
        raise InputError("f and Mf live on different grids")
    f_log = log_lp_power(f, p)
    if not math.isfinite(f_log):
        raise DomainError("f vanishes identically")
    log_ratio = (log_lp_power(Mf, p) - f_log) / p
    return NormReport(p, log_ratio, weak_type_report(f, Mf, lambdas))


def even_extension(f: GridFunction) -> GridFunction:
    """Reflect a grid starting at the origin across every coordinate hyperplane."""
    if not f.touches_boundary:
        raise DomainError(f"Even extension needs a grid starting at the origin, got {f.origin}")
    values = f.values
    for axis in range(f.dim):
        values = np.concatenate([np.flip(values, axis=axis), values], axis=axis)
    origin = tuple(-size * f.spacing for size in f.dims)
    return GridFunction(origin, f.spacing, values)
