"""Exception hierarchy shared across the package."""


class IetError(Exception):
    """Base class for all package errors."""


class StructuralError(IetError, ValueError):
    """Malformed input data (bad bijections, bad lengths, bad JSON)."""


class ReducibleError(StructuralError):
    """Combinatorial data is reducible; downstream objects refuse it."""


class DomainError(IetError, ValueError):
    """A point is outside the map's domain of definition."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class SingularityError(DomainError):
    """A point sits on (or within tolerance of) a singularity."""


class ConnectionError_(IetError, RuntimeError):
    """Renormalization halted: the two candidate cut points tie."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DepthError(IetError, RuntimeError):
    """A computation needs a deeper renormalization path than provided."""


class InsufficientDataError(IetError, RuntimeError):
    """Too few data points for a requested regression."""


class HypothesisError(IetError, RuntimeError):
    """A solver was invoked on an instance whose certified Diophantine
    report does not satisfy the admissibility inequality."""


class DecayFailureError(IetError, RuntimeError):
    """The corrected function's renormalized sums do not decay fast
    enough for the constructive solution to be trusted."""


class DivergenceError(IetError, RuntimeError):
    """A truncated operator series has a non-summable fitted tail."""


class ConsistencyError(IetError, RuntimeError):
    """An exact cross-check (rank formula, visit count) disagreed with
    the closed-form prediction; signals a bug, not bad input."""


class DegreeError(IetError, ValueError):
    """Requested derivative order exceeds the stored representation."""


class ResidualError(IetError, RuntimeError):
    """A solution was produced but failed its from-scratch residual check."""


class PrimitivityError(IetError, ValueError):
    """A loop matrix is not primitive; no Perron-Frobenius data."""
