"""Exceptions, warnings and sentinel results shared by all modules."""


class _Sentinel:
    """Named singleton used for non-numeric outcomes (``Divergent``, ``Unbounded``)."""

    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name

    def __reduce__(self):
        return self.name

    def __bool__(self):
        return True


DIVERGENT = _Sentinel("DIVERGENT")
UNBOUNDED = _Sentinel("UNBOUNDED")


def is_divergent(value):
    return value is DIVERGENT


def is_unbounded(value):
    return value is UNBOUNDED


class HausdorffBoundsError(Exception):
    """Base class for errors raised by this package."""


class QuadratureFailure(HausdorffBoundsError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class DivergentMass(HausdorffBoundsError):
    """A weight is not integrable on the requested ball."""


class DivergentNorm(HausdorffBoundsError):
    """A norm integral diverges (decided from exponents, never from overflow)."""


class DivergentIntegral(HausdorffBoundsError):
    """An operator or constant integral diverges."""


class DivergentNumerator(HausdorffBoundsError):
    """The norm of the operator output is infinite."""


class ZeroDenominator(HausdorffBoundsError):
    """A source norm vanished, so the ratio is undefined."""


class SingularMatrix(HausdorffBoundsError):
    """A matrix family is not invertible at a sample point."""


class HypothesisViolation(HausdorffBoundsError):
    """Parameters do not satisfy the hypotheses required by an operation."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ConfigError(HausdorffBoundsError):
    """An experiment configuration failed validation."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class IoError(HausdorffBoundsError):
    """Writing an output file failed."""


class TruncationWarning(UserWarning):
    """A sum or supremum was truncated without an analytic tail estimate."""


class BranchAmbiguity(UserWarning):
    """A matrix norm equals 1 on a set of positive measure."""


class OutOfRangeWarning(UserWarning):
    """Parameters are accepted but lie outside the classical range of the definitions."""
