"""Exception hierarchy."""


class TiltError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(TiltError, ValueError):
    pass


class NonIntegrableError(TiltError, ArithmeticError):
    """The density or a tilted integral does not converge."""


class OutOfDomainError(TiltError, ValueError):
    """Argument lies outside the range of h (or of m)."""


class BelowMeanError(OutOfDomainError):
    """Requested tilted mean does not exceed the untilted mean m(0)."""


class InfeasibleChainError(TiltError, ValueError):
    """A conditional tilt m_i fell at or below m(0)."""


class OracleFailureError(TiltError, ArithmeticError):
    """The Fourier inversion oracle could not resolve the characteristic function."""


class InsufficientAcceptanceError(TiltError, RuntimeError):
    """Too few Monte Carlo samples landed in the conditioning slab."""
