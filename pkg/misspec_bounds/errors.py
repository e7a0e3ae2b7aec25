class MisspecError(Exception):
    """Base class for errors raised by misspec_bounds."""


class InvalidInputError(MisspecError, ValueError):
    """Non-finite entries, mismatched dimensions or otherwise malformed input."""


class DecompositionError(MisspecError, ValueError):
    """A covariance matrix could not be Cholesky factorized."""


class ConditioningError(MisspecError, ArithmeticError):
    """A matrix that must be inverted is singular or too badly conditioned."""


class CapabilityError(MisspecError, NotImplementedError):
    """The requested operation is not supported by the model."""


class EvaluationError(MisspecError, FloatingPointError):
    """A function evaluation returned a non-finite value."""


class DomainError(MisspecError, ValueError):
    """A value fell outside the domain of the function applied to it."""


class UsageError(InvalidInputError):
    """Invalid experiment configuration or command-line usage."""
