"""Exception taxonomy shared across the package.

Exit-code mapping used by the command line front end:
config problems -> 2, characteristic values -> 3, convergence failures -> 4.
"""


class PossioError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PossioError, ValueError):
    """Invalid configuration input (bad value, unknown key, malformed file)."""


class DomainError(PossioError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class GridMismatchError(PossioError, ValueError):
    """Two chord functions or grids that must match do not."""


class CharacteristicValueError(PossioError, ArithmeticError):
    """The Laplace parameter sits on (or numerically near) a characteristic
    value: the Fredholm determinant vanishes and the resolvent does not exist."""


class ConvergenceError(PossioError, ArithmeticError):
    """A quadrature, inversion, or iteration failed its self-consistency gate."""


class DecayError(PossioError, ValueError):
    """Sampled time data does not decay enough for a truncated transform."""
