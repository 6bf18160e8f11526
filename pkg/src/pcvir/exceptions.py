class PcvirError(Exception):
    """Base class for errors raised by this package."""


class DomainError(PcvirError, ValueError):
    """An argument lies outside the domain of a numerical routine."""


class DataError(PcvirError, ValueError):
    """Input data violates a precondition (missing values, bad labels, ...)."""


class FitError(PcvirError, RuntimeError):
    """A model could not be fitted for a group or feature."""
