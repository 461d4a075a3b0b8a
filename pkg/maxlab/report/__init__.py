from .artifacts import linear_value, to_plain, add_linear_values, spec_sidecar, write_artifact
from .template import SummaryTemplate

__all__ = ["linear_value", "to_plain", "add_linear_values", "spec_sidecar", "write_artifact", "SummaryTemplate"]
