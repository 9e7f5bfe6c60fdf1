"""Exception hierarchy shared by the whole package.

The classes mirror the failure taxonomy surfaced by the command line tool:
document problems, shape/validity problems, admissibility problems and
numerical (verification) problems are kept distinguishable so callers can map
them to stable exit codes.
"""


class MhxError(Exception):
    """Base class for every error raised by this package."""


class DocumentError(MhxError):
    """A document could not be parsed or violates the file schema."""


class DimensionMismatchError(MhxError):
    """Operands live in different spaces or have incompatible shapes."""


class FiltrationError(MhxError):
    """A filtration violates its containment chain or support contract."""


class NilpotencyError(MhxError):
    """An operator expected to be nilpotent is not."""


class NotMixedHodgeError(MhxError):
    """A (W, F) pair fails mixed Hodge validation.

    ``level`` carries the first offending bidegree ``(a, b)`` or filtration
    index at which validation failed, when known.
    """

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class ShapeError(MhxError):
    """A structure does not have the required graded shape."""


class NotMorphismError(MhxError):
    """A linear map is not compatible with the filtrations."""


class AdmissibilityError(MhxError):
    """Orbit data is inadmissible (no relative weight filtration, or the
    translated filtration fails validation on the sampled region)."""


class NonExistenceError(AdmissibilityError):
    """A relative weight filtration does not exist for the given pair."""


class NumericalError(MhxError):
    """A mandatory verification failed; on the floating backend this points
    at a tolerance problem, on the exact backend at an internal bug."""


class DegenerateConfigurationError(MhxError):
    """Input points or parameters are degenerate (e.g. coincident points)."""
