"""Exception hierarchy for the polybem package."""


class PolyBemError(Exception):
    """Base class for all polybem errors."""


class InvalidPolygon(PolyBemError):
    """Polygon is self-intersecting, degenerate or otherwise not simple."""


class NotStarShaped(PolyBemError):
    """Polygon has an empty visibility kernel (no inscribed circle exists)."""


class NoAdmissibleChord(PolyBemError):
    """No chord splits the element into two star-shaped children."""


class NotAdjacent(PolyBemError):
    """Elements do not share a full edge."""


class UnionNotStarShaped(PolyBemError):
    """Glueing two elements would create a non-star-shaped element."""


class MeshInconsistent(PolyBemError):
    """A mesh invariant (incidence, area partition, orientation) is violated."""


class SingularEvaluation(PolyBemError):
    """Kernel evaluated at a singular point (coincident arguments)."""


class SingleLayerNotSPD(PolyBemError):
    """Single-layer Galerkin matrix failed its Cholesky factorization."""


class OutsideElement(PolyBemError):
    """Evaluation point lies outside (or on the boundary of) the element."""


class InvalidOrder(PolyBemError):
    """Approximation order must be a positive integer."""


class MissingDirichlet(PolyBemError):
    """The boundary carries no Dirichlet edge; the problem is not well posed."""


class DataOrderTooHigh(PolyBemError):
    """Boundary data polynomial degree exceeds the trial space order."""


class NotConverged(PolyBemError):
    """Linear solver failed; the system is likely indefinite or inconsistent."""


class UnknownProblem(PolyBemError):
    """Requested built-in problem name is not registered."""
