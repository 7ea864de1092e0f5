"""Exception types shared across the package."""


class ZdrdError(Exception):
    """Base class for all zdrd errors."""


class DimensionMismatch(ZdrdError, ValueError):
    """Matrix or vector shapes are mutually inconsistent."""


class NotPSD(ZdrdError, ValueError):
    """A matrix required to be positive semidefinite is not."""


class NotPD(ZdrdError, ValueError):
    """A matrix required to be strictly positive definite is not."""


class EigenFailure(ZdrdError, ArithmeticError):
    """An eigenvalue iteration failed to converge."""


class InfeasibleModel(ZdrdError, ValueError):
    """No strictly feasible point exists for the requested program."""


class SolverDivergence(ZdrdError, ArithmeticError):
    """The barrier iteration exceeded its iteration caps without converging."""


class BadDistortion(ZdrdError, ValueError):
    """The distortion target is not a positive real number."""


class OrderViolation(ZdrdError, ValueError):
    """Diagonal covariance profiles violate the required elementwise order."""


class ConfigParse(ZdrdError, ValueError):
    """An experiment configuration document could not be parsed."""


class AlphabetOverflow(ZdrdError, RuntimeError):
    """The observed joint quantizer alphabet exceeded the configured cap."""
