"""Exception hierarchy shared by the parser, the engines and the oracle."""

from __future__ import annotations


class LinealError(Exception):
    """Base class for every error raised by lineal_lab."""


class ParseError(LinealError):
    def __init__(self, message: str, source: str = "", offset: int = 0):
        self.offset = offset
        self.line = source.count("\n", 0, offset) + 1
        self.column = offset - (source.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{self.line}:{self.column}: {message}")


class DialectError(ParseError):
    """A construct was used outside the dialects that allow it."""


class TypeCheckError(LinealError):
    pass


class LinearityError(TypeCheckError):
    """A superposition-typed variable is used more than once."""


class FuelExhausted(LinealError):
    def __init__(self, fuel: int, term=None):
        self.fuel = fuel
        self.term = term
        super().__init__(f"fuel exhausted after {fuel} steps")


class DegenerateMeasurement(LinealError):
    """Measurement of a vector whose total squared norm is zero."""


class NormViolation(LinealError):
    pass


class ReadbackError(LinealError):
    """A normal form could not be read back as a state vector."""


class OracleError(LinealError):
    pass
