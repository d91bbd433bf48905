"""Exception taxonomy.

Every failure the library can signal deliberately derives from
``StegboundError`` so callers (and the service layer) can map error
classes to exit codes / HTTP statuses without string matching.
"""


class StegboundError(Exception):
    """Base class for all stegbound errors."""


class DimensionMismatchError(StegboundError, ValueError):
    """Operands describe spaces of different dimension."""


class NotPositiveDefiniteError(StegboundError, ValueError):
    """Covariance factorization failed; ``pivot`` is the 0-based index."""

    def __init__(self, message: str, pivot: int):
        super().__init__(message)
        self.pivot = pivot


class DegenerateModelError(StegboundError, ValueError):
    """An all-zero-covariance model was used where a density is required."""


class DegenerateCodebookError(StegboundError, ValueError):
    """More than one codeword requested from a zero-covariance message model."""


class CodebookTooLargeError(StegboundError, ValueError):
    """Codebook size exceeds what can be materialized in memory."""


class InconsistentBudgetError(StegboundError, ValueError):
    """Error-probability target and divergence budget admit no factor range."""


class TooFewSamplesError(StegboundError, ValueError):
    """Covariance estimation needs at least two sample vectors."""


class EmptyImageError(StegboundError, ValueError):
    """Partitioning produced no cliques (e.g. block larger than the image)."""


class PgmFormatError(StegboundError, ValueError):
    """Base class for PGM parsing failures."""


class UnsupportedFormatError(PgmFormatError):
    """Input is not a binary (P5) PGM stream."""


class BadHeaderError(PgmFormatError):
    """PGM header is malformed (non-integer tokens, bad dimensions...)."""


class TruncatedError(PgmFormatError):
    """PGM payload is shorter than the header promises."""
