"""Exception hierarchy shared by every layer of the package."""


class SuperfedosovError(Exception):
    """Base class for all errors raised by this package."""


class SignatureError(SuperfedosovError, ValueError):
    """Operands live on charts with different (p, q) signatures."""


class NotInvertibleError(SuperfedosovError, ZeroDivisionError):
    """A superfunction with vanishing body was inverted."""


class PoleError(SuperfedosovError, ZeroDivisionError):
    """A denominator vanished at an evaluation point."""


class HomogeneityError(SuperfedosovError, ValueError):
    """A parity-consuming operation received a mixed-parity input."""


class DegenerateFormError(SuperfedosovError, ValueError):
    """Gaussian elimination found no pivot with invertible body."""


class PreconditionError(SuperfedosovError, ValueError):
    """An input violates a documented precondition (symmetry, parity, ...)."""


class InvariantError(SuperfedosovError, ValueError):
    """A constructed object fails one of its defining invariants.

    ``indices`` names the offending coordinate slots (0-based) and
    ``residual`` carries the nonzero value that witnessed the failure.
    """

    def __init__(self, message, indices=None, residual=None):
        super().__init__(message)
        self.indices = indices
        self.residual = residual


class ParseError(SuperfedosovError, ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.message = message
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")

    def pointer(self) -> str:
        return f"{self.text}\n{' ' * self.position}^"


class SpecError(SuperfedosovError, ValueError):
    """Malformed chart-specification file (structure, keys, indices)."""
