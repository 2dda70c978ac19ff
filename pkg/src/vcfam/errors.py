"""Exception types shared across the package.

The CLI maps these onto process exit codes: data/file problems exit 3,
numerical failures exit 4, and argparse itself handles usage errors (2).
"""


class VcfamError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(VcfamError):
    """Array dimensions do not line up."""


class ParameterError(VcfamError):
    """A parameter value is outside its allowed range."""


class DomainError(VcfamError):
    """Evaluation points fall outside a basis domain.

    Carries the index of the first offending point when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ExtrapolationError(DomainError):
    """Prediction requested outside the fitted domain."""


class SingularityError(VcfamError):
    """A matrix required to be positive definite is not.

    ``pivot_index`` is the zero-based index of the failing Cholesky pivot
    when the factorization reported one.
    """

    def __init__(self, message, pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class BasisRankError(VcfamError):
    """A basis Gram matrix is numerically rank deficient."""


class SizingError(VcfamError):
    """A requested array would be unreasonably large."""


class ContractError(VcfamError):
    """Objects passed together do not belong together (e.g. basis mismatch)."""


class TuningError(VcfamError):
    """Every candidate on a tuning grid failed to produce a fit."""


class DataError(VcfamError):
    """A data file is malformed or inconsistent."""


class DegenerateFitWarning(UserWarning):
    """Fit produced zero residual variance; downstream quantities are suspect."""
