"""Exception hierarchy.

Errors fall into three families that the CLI maps to distinct exit codes:
analytic negatives (the mathematics says "no"), validation problems with the
input, and numerical failures (the computation could not certify an answer).
"""


class QuasinilError(Exception):
    """Base class for every error raised by this package."""


class AnalyticNegative(QuasinilError):
    """The hypothesis of an operation is false for the given input."""


class ValidationError(QuasinilError):
    """Malformed or inconsistent input."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class NumericalFailure(QuasinilError):
    """A computation could not be carried out or certified in floating point."""


class DimensionMismatch(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class UnknownKind(ValidationError):
    pass


class NotQuotientBounded(AnalyticNegative):
    pass


class NotEquivalent(AnalyticNegative):
    pass


class RadiusNotLessThanOne(AnalyticNegative):
    pass


class SingularMatrix(NumericalFailure):
    pass


class SpectrumHit(NumericalFailure):
    """The resolvent was requested at (numerically) a point of the spectrum."""


class LocalSpectrumHit(SpectrumHit):
    pass


class ClusterSeparationFailure(NumericalFailure):
    pass


class ConvergenceFailure(NumericalFailure):
    pass


class DivergenceDetected(NumericalFailure):
    pass


class Overflow(NumericalFailure):
    def __init__(self, message, last_n=None):
        self.last_n = last_n
        super().__init__(message)


class OracleDisagreement(NumericalFailure):
    pass


class BracketMismatch(NumericalFailure):
    pass
