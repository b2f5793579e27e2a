"""Exception types shared across the package."""


class NoisyGeomError(Exception):
    """Base class for every error raised by this package."""


class GeneralPositionViolation(NoisyGeomError):
    """An exact predicate evaluated to zero where a strict answer is required."""


class InvalidNoiseLevel(NoisyGeomError, ValueError):
    """Error probability outside [0, 1/2)."""


class BudgetExhausted(NoisyGeomError):
    """A walk used up its step budget (after any allowed retries)."""


class StructuralError(NoisyGeomError):
    """A structural precondition of a search structure does not hold."""


class InconsistentStructure(NoisyGeomError):
    """Noisy decisions produced a structure that cannot be continued."""


class InvalidHandle(NoisyGeomError):
    """A node handle is not part of the tree it was passed with."""


class EmptyStructure(NoisyGeomError):
    """Operation requires a non-empty structure."""


class CrossingSegments(NoisyGeomError):
    """Input segments were required to be pairwise non-crossing."""


class TooFewPoints(NoisyGeomError):
    """Not enough input points for the requested construction."""


class GenerationBudgetExceeded(NoisyGeomError):
    """Rejection sampling failed to produce a valid instance."""
