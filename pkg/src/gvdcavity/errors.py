"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameters or configuration (CLI exit code 1)."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed (CLI exit code 2)."""


class SingularDenominatorError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
