"""Exception types shared across the package."""


class QsmError(Exception):
    """Base class for all qsmlab errors."""


class InvalidEntries(QsmError, ValueError):
    """Array contains NaN/Inf entries."""


class RankDeficient(QsmError, ValueError):
    """Input vectors are linearly dependent beyond tolerance."""


class NotHermitian(QsmError, ValueError):
    """Matrix fails the Hermiticity invariant."""


class EmptyShell(QsmError, ValueError):
    """No eigenvalue falls inside the requested energy window."""


class TooLarge(QsmError, ValueError):
    """Requested dimension exceeds the dense-storage ambient cap."""


class DimensionMismatch(QsmError, ValueError):
    """Operands live in spaces of different dimension."""


class DecompositionIncompatible(QsmError, ValueError):
    """Macro-variable does not commute with the shell projector."""


class IndexOutOfRange(QsmError, IndexError):
    """Selected index outside the admissible list."""


class NullConditional(QsmError, ValueError):
    """Conditional density matrix has vanishing normalization."""


class DegenerateDistribution(QsmError, ValueError):
    """Sampling distribution has (numerically) zero total mass."""


class OffGrid(QsmError, ValueError):
    """Location does not lie on the model grid."""


class InvariantViolation(QsmError, RuntimeError):
    """A numerical invariant (norm, trace, positivity) was violated."""


class ConfigError(QsmError, ValueError):
    """Scenario configuration is invalid; carries the offending field."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field
