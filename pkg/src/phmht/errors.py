"""Exception types shared across the package."""


class PHMHTError(Exception):
    """Base class for all package errors."""


class InputError(PHMHTError, ValueError):
    """Malformed or invalid input data."""


class ParameterError(PHMHTError, ValueError):
    """An argument is outside its allowed range."""


class UndefinedStatisticError(PHMHTError, ValueError):
    """A statistic is not defined for the given diagram (e.g. log of no bars)."""


class DegeneratePoolError(PHMHTError):
    """A null pool cannot be used for standardization."""


class GuardError(PHMHTError):
    """An internal size or consistency guard refused to continue."""
