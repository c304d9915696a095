"""Exception hierarchy shared by all modules."""


class BSzegoError(Exception):
    """Base class for every error raised by the package."""


class ModeMixError(BSzegoError, TypeError):
    """Exact rationals and floats were mixed in one container."""


class NotPositiveDefinite(BSzegoError):
    def __init__(self, msg="matrix is not positive definite", pivot=None):
        super().__init__(msg if pivot is None else f"{msg} (pivot {pivot})")
        self.pivot = pivot


class NotPositive(BSzegoError):
    def __init__(self, msg="functional is not positive", degree=None):
        super().__init__(msg if degree is None else f"{msg} (degree {degree})")
        self.degree = degree


class DegreeZero(BSzegoError):
    pass


class NoConvergence(BSzegoError):
    def __init__(self, msg="no convergence", achieved=None):
        super().__init__(msg if achieved is None else f"{msg} (achieved {achieved:.3g})")
        self.achieved = achieved


class AmbiguousRank(BSzegoError):
    pass


class DegreeViolation(BSzegoError):
    pass


class InterpolationInconsistent(BSzegoError):
    pass


class ZeroInput(BSzegoError):
    pass


class UnpairedRoots(BSzegoError):
    pass


class InteriorUnitRoot(BSzegoError):
    pass


class NotStable(BSzegoError):
    pass


class RegimeViolation(BSzegoError):
    pass


class ZeroOffRealInterval(BSzegoError):
    pass


class NonSimpleZero(BSzegoError):
    pass


class NotASimpleZero(BSzegoError):
    pass


class InconsistentMasses(BSzegoError):
    pass


class NoSolution(BSzegoError):
    pass


class DegenerateNormalization(BSzegoError):
    pass


class Undecided(BSzegoError):
    def __init__(self, msg="undecided", box=None):
        super().__init__(msg if box is None else f"{msg}; suspect box {box}")
        self.box = box


class GcdTrivial(BSzegoError):
    pass


class ResidualNonzero(BSzegoError):
    pass


class DimensionMismatch(BSzegoError):
    pass


class StabilityViolation(BSzegoError):
    pass


class NotPositiveOnGrid(BSzegoError):
    pass


class SpecParseError(BSzegoError, ValueError):
    pass


class BoundTooSmall(BSzegoError):
    pass
