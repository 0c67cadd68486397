"""Exception and warning types shared across the package."""


class StochasticError(Exception):
    """Base class for all package errors."""


class InvalidInputError(StochasticError, ValueError):
    pass


class UndefinedCorrelationError(StochasticError, ArithmeticError):
    """Raised when a correlation denominator is zero (e.g. a constant stream)."""


class OutOfRangeError(StochasticError, ValueError):
    """Raised when a probability has no finite voltage mapping."""


class DivisionUndefinedError(StochasticError, ArithmeticError):
    pass


class DegenerateFusionError(StochasticError, ArithmeticError):
    pass


class NetlistError(StochasticError, ValueError):
    """Malformed or invalid netlist. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DslError(StochasticError, ValueError):
    """Diagnostic raised by the network-description front end."""

    def __init__(self, message, line=None, col=None, filename="<input>"):
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename
        super().__init__(self.format())

    def format(self):
        if self.line is None:
            return f"{self.filename}: {self.message}"
        return f"{self.filename}:{self.line}:{self.col}: {self.message}"


class UnsupportedStructureError(DslError):
    pass


class ContractViolation(UserWarning):
    """Correlation precondition of a stochastic circuit was not met."""
