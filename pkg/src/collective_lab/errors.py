"""Exception types raised across the package."""


class CollectiveLabError(Exception):
    """Base class for all package errors."""


class NotHermitian(CollectiveLabError, ValueError):
    pass


class NotPSD(CollectiveLabError, ValueError):
    pass


class NotUnit(CollectiveLabError, ValueError):
    pass


class ShapeMismatch(CollectiveLabError, ValueError):
    pass


class OutOfRange(CollectiveLabError, ValueError):
    pass


class NegativeProbability(CollectiveLabError, ValueError):
    pass


class Leakage(CollectiveLabError, RuntimeError):
    """Walker amplitude would leave the finite lattice."""


class NoSolution(CollectiveLabError, RuntimeError):
    """Coin search exhausted without matching the target anchor."""


class NoBracket(CollectiveLabError, ValueError):
    """Calibration target lies outside the fidelity range reached on the grid."""


class UnsupportedStructure(CollectiveLabError, ValueError):
    """POVM does not split into symmetric / antisymmetric-complement supported elements."""
