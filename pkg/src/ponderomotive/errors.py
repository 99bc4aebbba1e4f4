"""Exception and warning types shared across the package."""


class PonderomotiveError(Exception):
    """Base class for all package errors."""


class ModelError(PonderomotiveError):
    """A physics or numerics failure while evaluating a configuration."""


class InputError(PonderomotiveError):
    """Bad user input: configuration, file contents or arguments."""


class NonPhysicalInput(ModelError):
    """A covariance matrix violates the uncertainty principle."""


class NormalizationError(InputError):
    """A covariance matrix carries the wrong vacuum normalization."""


class NoRealSolution(ModelError):
    """The substandard-form quadratic has no real roots."""


class DegenerateBlock(ModelError):
    """A diagonal block has non-positive determinant."""


class DegenerateState(ModelError):
    """A marginal is pure, which leaves the standard-form scalings undefined."""


class NoConvergence(ModelError):
    """A root finder failed to reach the requested residual."""


class SingularSusceptibility(ModelError):
    """The spring-modified susceptibility has a pole at the evaluation point."""


class SingularSystem(ModelError):
    """The closed-loop linear system is rank deficient."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class NotAchievable(ModelError):
    """No noise level in the search bracket reaches the requested ratio."""


class ConfigError(InputError):
    """Invalid or missing configuration value."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ParseError(InputError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, token=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.token = token


class ValidationError(InputError):
    """Parsed data violates a table or type invariant."""


class GridTooCoarse(UserWarning):
    """The Nyquist locus moved too far in phase between adjacent samples."""
