"""Exception hierarchy shared by the library modules."""


class RieszFlowError(Exception):
    """Base class for all rieszflow errors."""


class DimensionError(RieszFlowError, ValueError):
    pass


class SizeMismatchError(RieszFlowError, ValueError):
    pass


class MonotonicityError(RieszFlowError, ValueError):
    pass


class UnsupportedError(RieszFlowError, ValueError):
    pass


class DomainError(RieszFlowError, ValueError):
    pass


class NoSteepestDescentError(RieszFlowError, ValueError):
    """Raised for r in (0,1) at a Dirac start, where no descent direction exists."""


class RangeError(RieszFlowError, ValueError):
    pass


class SolverFailureError(RieszFlowError, RuntimeError):
    pass


class PgmParseError(RieszFlowError, ValueError):
    pass


class DegenerateImageError(RieszFlowError, ValueError):
    pass


class EnergyIncreaseError(RieszFlowError, RuntimeError):
    """Raised when a particle run increases the energy beyond the Euler slack."""
