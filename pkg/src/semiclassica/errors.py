"""Exception hierarchy shared by every module."""


class SemiclassicaError(Exception):
    """Base class; ``exit_code`` is what the CLI returns."""

    exit_code = 2


class ConfigError(SemiclassicaError, ValueError):
    exit_code = 1


class GridError(SemiclassicaError, ValueError):
    exit_code = 1


class SymbolError(SemiclassicaError, ValueError):
    exit_code = 1


class PotentialError(SemiclassicaError, ValueError):
    exit_code = 1


class CoverageError(SemiclassicaError):
    pass


class ConvergenceError(SemiclassicaError):
    pass


class NumericalError(SemiclassicaError):
    pass


class GoldenMismatch(SemiclassicaError):
    exit_code = 3


class HypothesisError(SemiclassicaError, ValueError):
    """A theorem's hypothesis does not hold for the requested setup."""

    exit_code = 1
