"""Custom exception hierarchy for the formal Gaussian integration engine."""


class FormalGaussianError(Exception):
    """Base exception for all formal_gaussian errors."""

    pass


class ConfigValidationError(FormalGaussianError):
    """Raised when configuration validation fails."""

    pass


class SpecParseError(FormalGaussianError):
    """Raised when a job specification or series literal cannot be parsed."""

    def __init__(self, message: str, field: str = ""):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class DomainError(FormalGaussianError):
    """Raised when an operation is mathematically undefined for its inputs."""

    pass


class DimensionMismatchError(DomainError):
    """Raised when operands disagree on variable count or truncation degree."""

    pass


class IndexRangeError(DomainError):
    """Raised when a variable or component index is out of range."""

    pass


class TruncationError(DomainError):
    """Raised when a result would need coefficients beyond the truncation degree."""

    pass


class ConstantTermError(DomainError):
    """Raised when a constant term is present (composition) or absent (reciprocal)."""

    pass


class SingularLinearPartError(DomainError):
    """Raised when the linear part of a system is not invertible over the rationals."""

    pass


class SummabilityError(DomainError):
    """Raised when a formal Gaussian integral is not summable below the output degree."""

    pass


class ResourceLimitError(FormalGaussianError):
    """Raised when a request exceeds a configured enumeration or size guard."""

    pass


class ResultWriteError(FormalGaussianError):
    """Raised when a result document cannot be written."""

    pass
