class SosBoundsError(Exception):
    """Base class for all errors raised by sos_bounds."""


class DimensionMismatch(SosBoundsError, ValueError):
    pass


class TermCountExceeded(SosBoundsError, RuntimeError):
    """A polynomial expansion grew past the configured term cap."""


class PolyFormatError(SosBoundsError, ValueError):
    pass


class InvalidInterval(SosBoundsError, ValueError):
    pass


class InvalidParameters(SosBoundsError, ValueError):
    pass


class InvalidOrder(SosBoundsError, ValueError):
    pass


class NotPositiveDefinite(SosBoundsError, ArithmeticError):
    """Cholesky pivot at or below tolerance.

    For moment matrices this means the measure has finite support
    (e.g. a constant polynomial) or the working precision is exhausted.
    """


class NoConvergence(SosBoundsError, ArithmeticError):
    pass


class BreakdownNonPositiveBeta(SosBoundsError, ArithmeticError):
    """The modified Chebyshev algorithm produced beta <= 0."""


class DenominatorZero(SosBoundsError, ZeroDivisionError):
    pass


class AnchorOutsideClosure(SosBoundsError, ValueError):
    pass


class BudgetExceeded(SosBoundsError, ValueError):
    pass


class UnknownName(SosBoundsError, KeyError):
    pass
