"""Exception types shared across the package."""


class FramecapError(Exception):
    """Base class for all framecap errors."""


class DomainError(FramecapError):
    """An argument is outside the mathematically valid range."""


class ZeroColumn(FramecapError):
    """A column has (numerically) zero norm and cannot be normalized."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"column {column} has zero norm")


class InfeasibleRegularity(FramecapError):
    """Regular sparse generation impossible: d*n/m is not an integer."""


class GenerationExhausted(FramecapError):
    """Randomized generation failed within the restart budget."""

    def __init__(self, restarts: int, message: str = ""):
        self.restarts = restarts
        super().__init__(message or f"generation failed after {restarts} restarts")


class NotSupported(FramecapError):
    """Requested construction parameters are outside the supported families."""


class NotADifferenceSet(FramecapError):
    """Residue set fails the difference-set counting property."""


class NotASteinerSystem(FramecapError):
    """Incidence matrix violates a Steiner-system constraint."""


class InfeasibleParameters(FramecapError):
    """Steiner parameters fail the divisibility feasibility conditions."""


class SearchExhausted(FramecapError):
    """Backtracking search hit the node-expansion budget."""

    def __init__(self, nodes: int, message: str = ""):
        self.nodes = nodes
        super().__init__(message or f"search exhausted after {nodes} node expansions")


class ConstructionBug(FramecapError):
    """Internal consistency check failed on a constructed object."""


class NoConvergence(FramecapError):
    """Iterative solver did not converge within its iteration cap."""


class AllSingular(FramecapError):
    """Every Monte-Carlo trial produced a singular (-inf) practical measure."""


class EmptyPlan(FramecapError):
    """Every sweep cell was skipped; nothing to run."""


class NoFiniteRows(FramecapError):
    """No finite rows available for the requested table slice."""


class InsufficientGrid(FramecapError):
    """The beta grid does not bracket the requested evaluation point."""
