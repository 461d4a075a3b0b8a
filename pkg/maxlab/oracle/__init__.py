from .report import OracleReport, SweepSummary, summarize, run_instances
from .configs import (
    ConeCase,
    BallConeConfig,
    DiamondConfig,
    classify,
    random_ball_config,
    random_diamond_config,
    random_level,
)
from .roots import positive_root, exit_length, xi_of_h, v_roots, root_samples, envelope_check, root_sweep
from .rectangle import clipped_box_volume, rectangle_lemma_check, rectangle_sweep
from .sophi import SliceCover, slice_cover, sophi_check, sophi_sweep
from .cover import cover_check, cover_sweep, cross_section_checks
from .slicing import SlicingFit, slicing_decay, slicing_fit

__all__ = [
    "OracleReport",
    "SweepSummary",
    "summarize",
    "run_instances",
    "ConeCase",
    "BallConeConfig",
    "DiamondConfig",
    "classify",
    "random_ball_config",
    "random_diamond_config",
    "random_level",
    "positive_root",
    "exit_length",
    "xi_of_h",
    "v_roots",
    "root_samples",
    "envelope_check",
    "root_sweep",
    "clipped_box_volume",
    "rectangle_lemma_check",
    "rectangle_sweep",
    "SliceCover",
    "slice_cover",
    "sophi_check",
    "sophi_sweep",
    "cover_check",
    "cover_sweep",
    "cross_section_checks",
    "SlicingFit",
    "slicing_decay",
    "slicing_fit",
]
