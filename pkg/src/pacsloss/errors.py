"""Exception types raised by pacsloss."""


class PacsLossError(Exception):
    """Base class for all library errors."""


class TruncationTooSmall(PacsLossError, ValueError):
    """The Fock truncation drops more probability than allowed."""


class DimensionMismatch(PacsLossError, ValueError):
    """Operands live in Fock spaces of different dimension."""


class GridTooSmall(PacsLossError, ValueError):
    """A phase-space grid does not cover or resolve the function on it."""


class OutOfGrid(PacsLossError, ValueError):
    """A requested coordinate lies outside the grid."""


class NoThresholdInRange(PacsLossError, ValueError):
    """Negativity does not vanish inside the searched decay-time bracket."""
