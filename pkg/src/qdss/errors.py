"""Exception types shared across the package."""


class QdssError(Exception):
    """Base class for all package-specific errors."""


class NotAntiHermitian(QdssError):
    """Matrix fails the anti-Hermitian check (a.conj().T != -a)."""


class DimensionMismatch(QdssError):
    """Operand dimensions are incompatible."""


class ZeroNorm(QdssError):
    """Vector norm below the hard zero guard; destructive cancellation."""


class LengthMismatch(QdssError):
    """Vector length does not match the expected size."""


class ShapeMismatch(QdssError):
    """Array shape does not match the declared layer or parameter layout."""


class EmptySet(QdssError):
    """Set input must contain at least one element."""


class EmptySequence(QdssError):
    """Sequence input must contain at least one element."""


class NonFiniteLoss(QdssError):
    """Forward pass produced NaN or Inf."""


class DomainError(QdssError):
    """Input outside the mathematical domain of the operation."""


class InvalidTensor(QdssError):
    """Tensor violates the tristochastic (Latin-square) marginals."""


class ConfigMismatch(QdssError):
    """Training configuration inconsistent with the supplied data or model."""


class NonPositiveVariance(QdssError):
    """Projected variance is not positive; entropy undefined."""
