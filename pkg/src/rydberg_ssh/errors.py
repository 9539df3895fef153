"""Exception types raised by rydberg-ssh.

Every error derives from a builtin category so callers can catch either the specific type or
``ValueError`` (bad input) / ``ArithmeticError`` (numerical failure).
"""


class LatticeSpecError(ValueError):
    """A lattice specification violates its invariants."""


class UnsupportedConfigurationError(ValueError):
    """The input is valid but the requested operation does not support it."""


class TimeGridError(ValueError):
    """A time grid is non-monotone, non-uniform or too short for the requested analysis."""


class IonizationDomainError(ValueError):
    """A field-ionization quantity is requested outside its physical domain."""


class ConfigError(ValueError):
    """A run configuration cannot be read or validated.

    Attributes:
        field: Dotted path of the offending field, or None for file-level problems.
    """

    def __init__(self, message: str, field: str | None = None) -> None:
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class NumericError(ArithmeticError):
    """A numerical computation produced or received non-finite or unusable values."""


class DegenerateInputError(NumericError):
    """The input leaves the quantity undefined (e.g. zero surviving population)."""


class IllPosedError(NumericError):
    """A least-squares problem has no unique solution.

    Attributes:
        pair: Labels of the two basis traces found to be (nearly) linearly dependent.
    """

    def __init__(self, message: str, pair: tuple[str, str]) -> None:
        self.pair = pair
        super().__init__(f"{message} (basis pair {pair[0]!r}, {pair[1]!r})")
