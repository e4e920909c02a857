"""
Exception hierarchy for the diagsum package.

Every error raised on purpose by the library derives from DiagsumError so
callers (the CLI in particular) can map failures to exit codes.
"""


class DiagsumError(Exception):
    """Base class for all diagsum errors."""
    pass


class InvalidExponentError(DiagsumError, ValueError):
    """Exponent outside its admissible range (p < 1, s <= 0) or unparsable."""
    pass


class DimensionMismatchError(DiagsumError, ValueError):
    """Vector count or length does not match the form."""
    pass


class CapacityError(DiagsumError):
    """A size guard was exceeded (dense tensor or sign enumeration)."""
    pass


class OutOfRegimeError(DiagsumError, ValueError):
    """Parameters fall outside the hypotheses of the requested formula."""
    pass


class UnsupportedOracleError(DiagsumError):
    """An exact norm oracle was called outside its preconditions."""
    pass


class DegenerateFormError(DiagsumError, ValueError):
    """The zero form has no diagonal ratio."""
    pass


class InvalidFitError(DiagsumError, ValueError):
    """Growth fit needs at least 3 distinct n and positive values."""
    pass


class FormFileError(DiagsumError):
    """Tensor JSON file is missing, malformed or inconsistent."""
    pass
