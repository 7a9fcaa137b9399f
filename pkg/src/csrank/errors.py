"""Exception hierarchy. Every error raised on bad input derives from CSRankError."""


class CSRankError(ValueError):
    pass


class EmptyStateError(CSRankError):
    pass


class DegenerateStateError(CSRankError):
    """Coherent components are numerically linearly dependent."""


class ShapeMismatchError(CSRankError):
    pass


class TruncationError(CSRankError):
    """Fock cutoff too small for the requested accuracy."""


class FockOverflowError(CSRankError):
    pass


class NonUnitaryError(CSRankError):
    pass


class ConditioningError(CSRankError):
    """Cancellation in a construction exceeds what double precision can resolve."""


class BipartitionError(CSRankError):
    pass


class SpecFormatError(CSRankError):
    """Malformed state file, unitary file, or named-state string."""


class SamplingError(CSRankError):
    """Rejection sampling gave up."""
