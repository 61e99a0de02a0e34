"""Exception hierarchy shared by all modules."""


class RZError(Exception):
    """Base class for every error raised by this package."""


class DivisionByZero(RZError, ZeroDivisionError):
    pass


class MixedParents(RZError, TypeError):
    pass


class UnsupportedResidueField(RZError, ValueError):
    pass


class PrecisionExhausted(RZError, ArithmeticError):
    """A result could not be certified at the available precision."""

    def __init__(self, message, depth=None):
        super().__init__(message)
        self.depth = depth


class NotNormalized(RZError, ValueError):
    pass


class ZeroVector(RZError, ValueError):
    pass


class IterationCap(RZError, RuntimeError):
    pass


class BadCoordinateIndex(RZError, KeyError):
    pass


class NonCoprime(RZError, ValueError):
    pass


class ShiftNotIntegral(RZError, AssertionError):
    pass


class NotASemimodule(RZError, ValueError):
    pass


class FormulaMismatch(RZError, AssertionError):
    pass


class NoBiPart(RZError, ValueError):
    pass


class ParseError(RZError, ValueError):
    """Malformed literal; ``position`` is the offending character offset."""

    def __init__(self, message, text="", position=0):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position
