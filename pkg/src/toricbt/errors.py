"""Exception hierarchy shared by every module of the package."""


class ToricBTError(Exception):
    """Base class for all library errors."""


class DivisionByZero(ToricBTError, ZeroDivisionError):
    pass


class NegativeValuation(ToricBTError, ValueError):
    pass


class UnsupportedEnumeration(ToricBTError):
    """The residue field of the backend is infinite."""


class RankDeficient(ToricBTError, ValueError):
    pass


class DimensionMismatch(ToricBTError, ValueError):
    pass


class NonIntegralNorm(ToricBTError, ValueError):
    pass


class Singular(ToricBTError, ValueError):
    pass


class RadiusTooLarge(ToricBTError, ValueError):
    pass


class PointOutsideCell(ToricBTError, ValueError):
    pass


class VertexNotFound(ToricBTError, KeyError):
    pass


class CellNotFound(ToricBTError, KeyError):
    pass


class CellMismatch(ToricBTError, ValueError):
    pass


class ParseError(ToricBTError, ValueError):
    """Malformed serialized input (scalar strings, JSON documents)."""
