"""Exception hierarchy shared by all modules."""


class QVEError(Exception):
    """Base class for every error raised by this package."""


class PoleError(QVEError, ValueError):
    """Evaluation requested at a pole of a meromorphic function."""


class DomainError(QVEError, ValueError):
    """Argument outside the documented domain of an operation."""


class CapacityError(QVEError, ValueError):
    """Requested table size exceeds what the implementation supports."""


class ConvergenceRegionError(QVEError, ValueError):
    """Parameters fall outside the region where a series is evaluated."""


class InsufficientCoefficientsError(QVEError, ValueError):
    """The coefficient table is too short for the requested evaluation."""


class FormParseError(QVEError, ValueError):
    """A form file does not conform to the expected schema."""


class HeckeViolationError(QVEError, ValueError):
    """Coefficients violate the Hecke relations or the Ramanujan-type bound."""


class TailTooLargeError(QVEError, ValueError):
    """A truncated sum's estimated tail exceeds the requested tolerance."""


class CostGuardError(QVEError, ValueError):
    """Parameters exceed the desk-scale cost caps and no override was given."""
