from typing import Optional, Sequence


class SchubertError(Exception):
    """Base class for every error raised by the schubert package"""


class ValidationError(SchubertError):
    """
    Input does not satisfy a documented invariant.

    `invariant` names the failed rule and `index` points at the offending
    condition (or entry) when there is one.
    """

    def __init__(self, message: str, invariant: Optional[str] = None, index: Optional[int] = None):
        super().__init__(message)
        self.invariant = invariant
        self.index = index


class InvalidBracketError(ValidationError):
    pass


class InvalidPartitionError(ValidationError):
    pass


class InvalidProblemError(ValidationError):
    pass


class ShapeMismatchError(SchubertError):
    pass


class SingularMatrixError(SchubertError):
    """Linear solve refused: the matrix is singular or too ill-conditioned"""

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = condition


class DegenerateFlagsError(SchubertError):
    """Two flags are not in general position (normalization or user instance check)"""

    def __init__(self, message: str, conditions: Sequence[int] = ()):
        super().__init__(message)
        self.conditions = tuple(conditions)


class PatchMissError(SchubertError):
    """A k-plane does not lie in the open cell of the coordinate patch"""


class PreconditionError(SchubertError):
    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class FileFormatError(SchubertError):
    pass
