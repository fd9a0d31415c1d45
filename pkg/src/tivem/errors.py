"""Exception types raised across the package."""


class TIVemError(Exception):
    """Base class for all package errors."""


class DegenerateDenominator(TIVemError):
    pass


class NonUnitDirection(TIVemError):
    pass


class SingularStiffness(TIVemError):
    pass


class MeshError(TIVemError):
    """Raised when a mesh violates one of its structural invariants."""


class DegenerateCell(MeshError):
    pass


class InvertedCell(MeshError):
    pass


class ZeroArea(MeshError):
    pass


class RankDeficientMonomials(TIVemError):
    pass


class NonPositiveJacobian(TIVemError):
    pass


class IncompatibleElementKind(TIVemError):
    pass


class UnconstrainedSystem(TIVemError):
    pass


class SolverBreakdown(TIVemError):
    pass


class VanishingAverageWarning(UserWarning):
    """Element-averaged fibre direction cancelled out; centroid value used instead."""
