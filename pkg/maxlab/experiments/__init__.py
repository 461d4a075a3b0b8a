from .sweeps import (
    FAMILIES,
    SweepSpec,
    ScanRow,
    ScanTable,
    weak11_scan,
    lp_scan,
    lp_test_functions,
    centered_contrast,
)

__all__ = [
    "FAMILIES",
    "SweepSpec",
    "ScanRow",
    "ScanTable",
    "weak11_scan",
    "lp_scan",
    "lp_test_functions",
    "centered_contrast",
]
