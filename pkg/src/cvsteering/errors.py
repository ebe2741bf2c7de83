"""Exception hierarchy shared by all modules."""


class SteeringError(Exception):
    """Base class for numerical failures raised by this package."""


class IntegrabilityError(SteeringError):
    """Raised when a Gaussian exponent is not positive definite."""


class DegenerateStateError(SteeringError):
    """Raised for zero-mass states or vanishing variances."""


class MarginalNegativityError(SteeringError):
    """Raised when a quadrature marginal is significantly negative."""
