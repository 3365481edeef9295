class HolonomyLabError(Exception):
    """Base class for library errors."""


class DimensionMismatch(HolonomyLabError, ValueError):
    pass


class NotInGroup(HolonomyLabError, ValueError):
    pass


class NotInAlgebra(HolonomyLabError, ValueError):
    pass


class LogDomainError(HolonomyLabError, ValueError):
    """Element lies outside the principal-logarithm domain."""


class DependentInputs(HolonomyLabError, ValueError):
    pass


class NotOnHyperboloid(HolonomyLabError, ValueError):
    pass


class DegenerateTriangle(HolonomyLabError, ValueError):
    pass


class CoincidentPoints(HolonomyLabError, ValueError):
    pass


class RankDeficient(HolonomyLabError, ValueError):
    pass


class NotALoop(HolonomyLabError, ValueError):
    pass


class StartMismatch(HolonomyLabError, ValueError):
    """Initial lift point does not lie over the start of the curve."""


class NonFiniteCurve(HolonomyLabError, ValueError):
    pass


class DomainMismatch(HolonomyLabError, ValueError):
    pass


class GridDomainError(HolonomyLabError, ValueError):
    pass


class UnsupportedDepth(HolonomyLabError, ValueError):
    pass


class AddressError(HolonomyLabError, ValueError):
    pass
