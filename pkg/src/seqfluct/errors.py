"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit with 2,
hard-invariant violations with 3 and refused (too large) computations with 4.
"""


class ValidationError(ValueError):
    """An input object or configuration violates a stated invariant.

    ``key`` optionally carries the offending configuration key path.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class DimensionError(ValidationError):
    """Objects built over different alphabets were combined."""


class MalformedSequenceError(ValidationError):
    """A sequence is not a possible outcome of the block model."""


class InfeasibleTripleError(ValidationError):
    """A (t, u, r) triple has no nonnegative integer block-count solution."""


class TransformInapplicableError(ValueError):
    """The random transformation has nothing to act on for this input."""


class InvariantViolation(AssertionError):
    """A bound that holds deterministically was observed to fail."""


class ResourceGuardError(RuntimeError):
    """An exhaustive computation was refused because it is too large."""
