"""Numerical laboratory for maximal operators on the positive orthant with the exponential measure."""

from .errors import MaxlabError, InputError, DomainError, CapabilityError, ClassificationError
from .config import Settings, load_settings, get_settings

__all__ = [
    "MaxlabError",
    "InputError",
    "DomainError",
    "CapabilityError",
    "ClassificationError",
    "Settings",
    "load_settings",
    "get_settings",
]
