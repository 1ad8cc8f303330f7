"""Exception hierarchy shared by all modules."""


class LifsError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(LifsError, ValueError):
    """Input data violates a structural precondition."""


class NumericalError(LifsError, ArithmeticError):
    """A numerical method could not deliver its guarantee."""


# local IFS construction
class MismatchedImage(ValidationError):
    pass


class OverlappingImages(ValidationError):
    pass


class DomainOutsideUnit(ValidationError):
    pass


class EmptySet(ValidationError):
    pass


class NotContractive(NumericalError):
    pass


# discrete RB operator
class NotAdmissible(ValidationError):
    pass


class GridNotAdmissible(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class InvalidP(ValidationError):
    pass


class MaxIterExceeded(NumericalError):
    pass


# interpolation
class ContractivityViolated(NumericalError):
    pass


class SingularConditions(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass


# jets
class ZeroLeadingCoefficient(ValidationError):
    pass


class DegenerateHankel(ValidationError):
    pass


class ThetaOutOfRange(ValidationError):
    pass


class NonDyadicPoint(ValidationError):
    pass


# collage fitting
class SingularNormalEquations(NumericalError):
    pass


class GammaNotLessThanOne(NumericalError):
    pass


# grids and subdivision
class GraphInvarianceViolated(NumericalError):
    pass


class IncompatibleBoundary(ValidationError):
    pass
