"""Exception types shared across the package.

The CLI maps these onto exit codes: invalid input (including file
format problems) exits with 2, degenerate instances exit with 3.
"""


class PruneError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(PruneError):
    """Malformed arguments: bad shapes, non-finite data, out-of-range budgets."""


class DegenerateInstanceError(PruneError):
    """Instance carries no usable signal, e.g. an all-zero Gram diagonal."""


class DegenerateSupportError(DegenerateInstanceError):
    """A support column induces a singular restricted system."""

    def __init__(self, column: int, message: str | None = None):
        self.column = column
        super().__init__(message or f"singular restricted system in column {column}")


class BreakdownError(PruneError):
    """Conjugate-gradient curvature vanished while the residual is nonzero."""


class InvalidTraceError(InvalidInputError):
    """Iteration trace violates a structural requirement, e.g. decreasing rho."""


class MatrixFileError(InvalidInputError):
    """Generic matrix-file format problem (bad version, dtype, or sizes)."""


class BadMagicError(MatrixFileError):
    """File does not start with the expected magic bytes."""


class TruncatedFileError(MatrixFileError):
    """File ends before the declared payload is complete."""


class NonFiniteDataError(MatrixFileError):
    """Payload contains NaN or infinite values."""
