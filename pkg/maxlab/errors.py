class MaxlabError(Exception):
    """Base class for every error raised by maxlab."""


class InputError(MaxlabError, ValueError):
    """Malformed input: dimension mismatch, bad flag values, unknown kinds."""


class DomainError(MaxlabError, ValueError):
    """A documented precondition of an operation does not hold."""


class CapabilityError(MaxlabError):
    """The requested method does not support this kind/dimension combination."""


class ClassificationError(MaxlabError):
    """A ball-cone configuration matches none of the boundary cases."""
