from .grid import GridFunction, CandidatePolicy, save_grid, load_grid
from .operators import (
    max_op_grid,
    centered_max_op_grid,
    average_over_ball,
    strong_max_grid,
    strong_max_upper,
)
from .norms import WeakTypeReport, NormReport, log_lp_power, weak_type_report, norms_and_weak, even_extension

__all__ = [
    "GridFunction",
    "CandidatePolicy",
    "save_grid",
    "load_grid",
    "max_op_grid",
    "centered_max_op_grid",
    "average_over_ball",
    "strong_max_grid",
    "strong_max_upper",
    "WeakTypeReport",
    "NormReport",
    "log_lp_power",
    "weak_type_report",
    "norms_and_weak",
    "even_extension",
]
