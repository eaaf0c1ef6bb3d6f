"""Exception hierarchy.

Validation failures carry the admissibility condition they violate so that
front ends can report it verbatim.
"""


class MovingSLError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(MovingSLError, ValueError):
    """A problem definition violates an admissibility condition."""

    condition = ""

    def __init__(self, message: str):
        if self.condition:
            message = f"{self.condition}: {message}"
        super().__init__(message)


class RhoNotPositive(ValidationError):
    condition = "admissibility rho = alpha1p*alpha2 - alpha2p*alpha1 > 0"


class DeterminantNotPositive(ValidationError):
    condition = "admissibility det(transmission matrix) > 0"


class DegenerateLeftBC(ValidationError):
    condition = "left boundary condition |beta1| + |beta2| != 0"


class EpsilonOutOfRange(ValidationError):
    condition = "0 < eps < (b - a)/2"


class PotentialNonFinite(ValidationError):
    condition = "q finite on each closed piece"


class NumericalError(MovingSLError, RuntimeError):
    """A numerical routine could not deliver a result."""


class StepSizeUnderflow(NumericalError):
    pass


class NonFinitePotential(NumericalError):
    pass


class MismatchedLambda(MovingSLError, ValueError):
    pass


class BoundSearchExhausted(NumericalError):
    pass


class ZeroOnContour(NumericalError):
    pass


class DegenerateLeadingCoefficient(MovingSLError, ValueError):
    pass


class NotInDomain(MovingSLError, ValueError):
    """An element handed to the operator violates a domain condition."""

    def __init__(self, condition: str, residual: float):
        self.condition = condition
        self.residual = residual
        super().__init__(f"domain condition {condition} violated (residual {residual:.3e})")


class LambdaIsEigenvalue(NumericalError):
    pass


class PointOnInterface(MovingSLError, ValueError):
    pass


class GridTooCoarse(MovingSLError, ValueError):
    pass


class EigensolverFailure(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class ClusterWarning(UserWarning):
    """Two eigenvalues were found closer than the scan resolution."""
