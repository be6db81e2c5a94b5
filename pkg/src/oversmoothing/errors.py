"""Exception types raised across the package."""


class OverSmoothingError(Exception):
    """Base class for all errors raised by this package."""


class NonDominantSpectrumError(OverSmoothingError):
    """Power iteration stalls because no eigenvalue strictly dominates in magnitude."""


class ZeroComponentError(OverSmoothingError):
    """The iterate collapsed to numerical zero."""


class NoConvergenceError(OverSmoothingError):
    """The shifted QR loop exceeded its iteration budget."""


class SizeLimitError(OverSmoothingError, ValueError):
    """A requested dense allocation exceeds the supported size."""


class ParseError(OverSmoothingError, ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ZeroStateError(OverSmoothingError, ValueError):
    """A metric that normalizes by the Frobenius norm received an all-zero state."""


class DegeneratePivotError(OverSmoothingError, ValueError):
    """The max-norm row has an exact zero in the max-norm column (strict ROD only)."""


class UnknownMethodError(OverSmoothingError, KeyError):
    pass


class IllConditionedError(OverSmoothingError, ValueError):
    pass


class EmptySelectionError(OverSmoothingError, ValueError):
    pass
