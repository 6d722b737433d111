"""Exception hierarchy shared across the package."""


class ConfresError(Exception):
    """Base class for all package errors."""


class InputError(ConfresError):
    """Bad user-supplied data (files, labels, indices, weights)."""


class ParameterError(InputError):
    """Out-of-range or inconsistent parameter value."""


class NumericalError(ConfresError):
    """Degenerate numerical situation (e.g. all-zero similarities)."""
