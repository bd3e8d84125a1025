"""Exception hierarchy shared by all modules."""


class SelSegError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(SelSegError, ValueError):
    """Grid dimensions are incompatible with the requested operation."""


class ParameterError(SelSegError, ValueError):
    """A user-supplied parameter or marker set violates its invariants."""


class NumericError(SelSegError, ArithmeticError):
    """Non-finite values or a vanishing divisor were encountered."""


class SingularSystemError(NumericError):
    """A zero pivot occurred in a direct solve."""


class DegenerateRegionError(NumericError):
    """A region-mean denominator vanished (one phase is empty)."""


class CoarseSolverError(NumericError):
    """The coarsest-level iteration diverged."""


class DivergenceError(NumericError):
    """A multigrid cycle produced a non-finite correction."""


class FormatError(SelSegError, ValueError):
    """Malformed image, marker or report file."""
