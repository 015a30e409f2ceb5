"""Typed errors shared across the engine."""


class EngineError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(EngineError):
    """Vector/matrix shapes do not line up with the program definition."""


class NumericalFailure(EngineError):
    """Pivoting stalled beyond the iteration cap or a certificate check broke."""


class InvalidBelief(EngineError):
    """A SecurityBelief violates its invariants."""


class InvalidSpec(EngineError):
    """A futures/options spec violates its invariants."""


class MissingBelief(EngineError):
    """A held or referenced instrument has no belief attached."""


class InconsistentPartition(EngineError):
    """Partition sets overlap or do not cover the instruments they must."""


class InfeasibleProblem(EngineError):
    """A built optimization problem has no feasible point.

    ``row`` names the constraint whose removal restores feasibility, when
    that diagnosis is unambiguous.
    """

    def __init__(self, message: str, row: str | None = None):
        super().__init__(message)
        self.row = row


class RepairFailure(EngineError):
    """Greedy rounding repair could not reach an integer-feasible point."""


class EmptyExchangePolyhedron(EngineError):
    """The exchange price polyhedron is empty; the game is ill-posed."""


class IncompatibleBudget(EngineError):
    """Trader budget rows admit no feasible volume vector."""


class TraderPolyhedronInfeasible(EngineError):
    """The trader polyhedron of a game has no feasible point."""


class LengthTooLong(EngineError):
    """Requested segment length does not fit in the time series."""


class NoTrials(EngineError):
    """An ability estimate was requested over zero trials."""


class ValidationError(EngineError):
    """A scenario payload failed schema validation.

    ``field`` is the dotted path of the offending entry.
    """

    def __init__(self, message: str, field: str = ""):
        super().__init__(message)
        self.field = field


class NotFound(EngineError):
    """Lookup of a scenario or solve record by id failed."""


class MissingInputs(EngineError):
    """The scenario lacks a section the requested model needs."""

    def __init__(self, message: str, section: str = ""):
        super().__init__(message)
        self.section = section
