from .families import (
    CubeBallFamily,
    CounterexampleRow,
    build_cube_family,
    build_ball_family,
    counterexample_ratio,
    prism_log_measure,
    sample_prism,
    certify_prism,
    base_log_measure,
    base_log_measure_exact,
    union_log_measure_exact,
    half_ball_indicator,
    grid_lower_bound,
)
from .diamond import (
    DiamondWitness,
    DiamondCertificate,
    diamond_witness,
    diamond_weak_functional,
    diamond_certificates,
)

__all__ = [
    "CubeBallFamily",
    "CounterexampleRow",
    "build_cube_family",
    "build_ball_family",
    "counterexample_ratio",
    "prism_log_measure",
    "sample_prism",
    "certify_prism",
    "base_log_measure",
    "base_log_measure_exact",
    "union_log_measure_exact",
    "half_ball_indicator",
    "grid_lower_bound",
    "DiamondWitness",
    "DiamondCertificate",
    "diamond_witness",
    "diamond_weak_functional",
    "diamond_certificates",
]
