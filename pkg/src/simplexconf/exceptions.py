"""Exception hierarchy shared by the whole package."""


class SimplexConfError(Exception):
    """Base class for every error raised by simplexconf."""


class DomainError(SimplexConfError, ValueError):
    """An argument lies outside the domain of a function."""


class BracketError(SimplexConfError, ValueError):
    """The objective does not change sign across the supplied bracket."""


class ConvergenceError(SimplexConfError, RuntimeError):
    """An iterative routine hit its iteration cap."""


class FitError(SimplexConfError, RuntimeError):
    """Maximum-likelihood fitting failed.

    The ``diagnostics`` attribute carries whatever convergence record was
    available when the optimizer gave up.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class RankError(FitError):
    """The design matrix is rank deficient."""


class ParseError(SimplexConfError, ValueError):
    """A data file could not be parsed."""


class SchemaError(SimplexConfError, ValueError):
    """A schema or model document is malformed or incompatible."""


class UnsupportedDimensionError(SimplexConfError, ValueError):
    """The operation is only defined for a specific number of parts."""
