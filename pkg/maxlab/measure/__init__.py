from .estimates import (
    MeasureMethod,
    MeasureEstimate,
    LaguerreParams,
    DoublingReport,
    EnvelopeReport,
)
from .exact import log_interval_mass, mu_cube_exact, asymptotic_prediction
from .quadrature import mu_quadrature, diamond_levels
from .montecarlo import mu_montecarlo, run_batches, box_proposal, slab_proposal
from .dispatch import measure_ball, best_method, doubling_ratio, doubling_sweep, envelope_sweep

__all__ = [
    "MeasureMethod",
    "MeasureEstimate",
    "LaguerreParams",
    "DoublingReport",
    "EnvelopeReport",
    "log_interval_mass",
    "mu_cube_exact",
    "asymptotic_prediction",
    "mu_quadrature",
    "diamond_levels",
    "mu_montecarlo",
    "run_batches",
    "box_proposal",
    "slab_proposal",
    "measure_ball",
    "best_method",
    "doubling_ratio",
    "doubling_sweep",
    "envelope_sweep",
]
