"""Exception hierarchy shared across the package."""


class FreudhcError(Exception):
    """Base class for all package-specific failures."""


class InvalidParamsError(FreudhcError, ValueError):
    """Raised when parameters violate their documented domain."""


class NonConvergenceError(FreudhcError, RuntimeError):
    """Raised when an iterative refinement stalls before reaching tolerance."""


class TailDominationError(NonConvergenceError):
    """Raised when a truncated coefficient box is too small for the requested error."""


class NoAdmissibleParameterError(FreudhcError, ValueError):
    """Raised when no operator parameter satisfies a rank budget."""
