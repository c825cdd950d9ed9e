"""Exception taxonomy shared across the package."""


class PccError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PccError):
    """Malformed input file: ragged rows, bad magic, non-numeric cells."""


class InvalidInput(PccError, ValueError):
    """Arguments or data violate an operation's preconditions."""


class DegenerateData(PccError):
    """Data admits no meaningful result (e.g. all pairwise distances equal)."""


class NumericalError(PccError):
    """Optimization produced a non-finite value."""
