"""Exception hierarchy. Each class carries the CLI exit code for its category."""


class EITKerrError(Exception):
    exit_code = 1


class ConfigError(EITKerrError, ValueError):
    exit_code = 2


class DomainError(EITKerrError, ValueError):
    exit_code = 3


class QuadratureError(EITKerrError, ArithmeticError):
    """Adaptive quadrature did not reach tolerance.

    ``residual`` is the estimated absolute error and ``worst_interval`` the
    subinterval with the largest local error estimate, when known.
    """

    exit_code = 4

    def __init__(self, message, residual=None, worst_interval=None):
        super().__init__(message)
        self.residual = residual
        self.worst_interval = worst_interval


class CalibrationError(EITKerrError, ArithmeticError):
    exit_code = 5


class CutoffError(EITKerrError, ValueError):
    exit_code = 6


class BasisMismatchError(EITKerrError, ValueError):
    exit_code = 7


class GateError(EITKerrError, ValueError):
    exit_code = 8


class StabilityError(EITKerrError, ValueError):
    exit_code = 9

    def __init__(self, message, required_step=None):
        super().__init__(message)
        self.required_step = required_step


class BlowUpError(EITKerrError, ArithmeticError):
    exit_code = 10


class PreconditionError(EITKerrError, ValueError):
    exit_code = 11
