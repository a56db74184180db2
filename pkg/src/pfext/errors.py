"""Exception hierarchy.

Every error raised on purpose by the package derives from ``PfextError``;
the CLI maps the subclasses onto exit codes.
"""


class PfextError(Exception):
    """Base class for all package errors."""


class ParseError(PfextError, ValueError):
    pass


class AllCoefficientsZero(PfextError, ValueError):
    pass


class ZeroFunction(PfextError, ValueError):
    pass


class RootIsolationFailure(PfextError, ArithmeticError):
    pass


class IrregularPoint(PfextError, ValueError):
    pass


class NonFuchsian(PfextError, ValueError):
    """Raised when an analysis requiring regular singularities gets an irregular operator."""


class NumericalFailure(PfextError, ArithmeticError):
    """Base class for failures of the continuation machinery."""


class PathTooCloseToSingularity(NumericalFailure):
    pass


class PrecisionExhausted(NumericalFailure):
    pass


class NoValidBasepoint(NumericalFailure):
    pass


class LiftFailure(NumericalFailure):
    pass
