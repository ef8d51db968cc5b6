"""Exception hierarchy shared by all modules."""


class KirchhoffError(Exception):
    """Base class for library errors."""


# nonlocal term / conditions
class EmptyTerm(KirchhoffError, ValueError):
    pass


class BadExponent(KirchhoffError, ValueError):
    pass


class NegativeArgument(KirchhoffError, ValueError):
    pass


class MissingEigenvalue(KirchhoffError, KeyError):
    pass


class UndecidableCondition(KirchhoffError):
    pass


# threshold
class BadDimension(KirchhoffError, ValueError):
    pass


class ConditionA3Violated(KirchhoffError, ValueError):
    pass


class BracketNotFound(KirchhoffError, RuntimeError):
    pass


# mesh
class BadParameters(KirchhoffError, ValueError):
    pass


class GridTooCoarse(KirchhoffError, ValueError):
    pass


class GridMismatch(KirchhoffError, ValueError):
    pass


# spectra / functional
class IterationDiverged(KirchhoffError, RuntimeError):
    pass


class SingularSystem(KirchhoffError, RuntimeError):
    pass


# solver
class GeometryViolated(KirchhoffError, ValueError):
    """Mountain-pass geometry does not hold for the requested path."""


class NoDivergenceDetected(KirchhoffError, RuntimeError):
    pass


class UnsupportedCase(KirchhoffError, ValueError):
    pass


class SecondSolutionNotFound(KirchhoffError, RuntimeError):
    """Raised by two_solutions; ``first`` carries the global minimizer."""

    def __init__(self, message, first=None, attempts=None):
        super().__init__(message)
        self.first = first
        self.attempts = attempts or []


# cli
class ConfigError(KirchhoffError, ValueError):
    pass
