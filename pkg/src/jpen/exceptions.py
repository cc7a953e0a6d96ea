"""Exception hierarchy.

Two families map onto the CLI exit codes: ``ValidationError`` (bad input or
parameters, exit 2) and ``NumericalError`` (a computation could not proceed,
exit 3).
"""


class JpenError(Exception):
    """Base class for all package errors."""


class ValidationError(JpenError, ValueError):
    pass


class NumericalError(JpenError, ArithmeticError):
    pass


class DimensionError(ValidationError):
    pass


class ParameterError(ValidationError):
    pass


class ConfigurationError(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class DegenerateVarianceError(ValidationError):
    """A variance on the diagonal is zero or negative."""

    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(
            f"variable {index} has nonpositive variance {value!r}; "
            "cannot rescale to a correlation matrix"
        )


class NotCorrelationError(ValidationError):
    pass


class InadmissibleError(ValidationError):
    """(lambda, gamma) lies outside the positive-definiteness region."""

    def __init__(self, lam, gamma, lambda_max):
        self.lam = lam
        self.gamma = gamma
        self.lambda_max = lambda_max
        super().__init__(
            f"(lambda={lam:g}, gamma={gamma:g}) is not admissible; "
            f"lambda_max at this gamma is {lambda_max:.6g}"
        )


class ExhaustedGridError(ValidationError):
    pass


class LabelError(ValidationError):
    pass


class ProtocolError(ValidationError):
    pass


class NotPositiveDefiniteError(NumericalError):
    def __init__(self, message, pivot=None):
        self.pivot = pivot
        super().__init__(message)


class IllConditionedError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class DegenerateDenominatorError(NumericalError):
    pass
