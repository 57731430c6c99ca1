"""Exception hierarchy shared by every module."""


class KemenyError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(KemenyError, ValueError):
    """Input failed a structural or probabilistic check."""


class NotSquare(ValidationError):
    pass


class RowSumViolation(ValidationError):
    pass


class NegativeEntry(ValidationError):
    pass


class NegativeOffDiagonal(ValidationError):
    pass


class NotIrreducible(ValidationError):
    pass


class SingularSystem(KemenyError, ArithmeticError):
    """A linear system that should be nonsingular was not."""


class RateTooSmall(ValidationError):
    pass


class NotPositiveRecurrent(ValidationError):
    """The speed measure of a diffusion has infinite total mass."""


class SigmaVanishes(ValidationError):
    pass


class QuadratureFailure(KemenyError, ArithmeticError):
    """Adaptive quadrature could not meet its tolerance within the depth cap."""


class Divergent(KemenyError, ArithmeticError):
    """A quantity is infinite (for instance gamma for the Ornstein-Uhlenbeck process)."""


class RunawayTrajectory(KemenyError, RuntimeError):
    """A simulated path exceeded its step or time cap."""


class StepTooLarge(ValidationError):
    pass


class ParseError(KemenyError, ValueError):
    """Expression syntax error at a 1-based character position."""

    def __init__(self, message, position, source=""):
        self.position = position
        self.source = source
        super().__init__(f"{message} at position {position}")


class UnknownFunction(ParseError):
    pass


class UnknownIdentifier(ParseError):
    pass


class DomainError(KemenyError, ArithmeticError):
    """Expression evaluated outside its domain; ``x`` is the offending argument."""

    def __init__(self, message, x):
        self.x = x
        super().__init__(f"{message} (x={x!r})")


class SchemaError(ValidationError):
    pass


class MalformedJson(ValidationError):
    def __init__(self, message, line):
        self.line = line
        super().__init__(f"{message} (line {line})")
