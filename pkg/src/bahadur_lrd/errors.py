"""Exception types raised across the package."""


class BahadurError(Exception):
    """Base class for computation errors (CLI exit code 1)."""


class AssumptionAError(BahadurError, ValueError):
    """The functional violates the branch/density structure at the requested point."""


class RankUndetectableError(BahadurError, ValueError):
    """Every Hermite coefficient up to the truncation order is below tolerance."""


class RegimeError(BahadurError, ValueError):
    """The requested quantity is undefined in the dependence regime at hand."""


class EmbeddingError(BahadurError, RuntimeError):
    """Circulant embedding stayed indefinite after all allowed doublings."""


class TruncationError(BahadurError, RuntimeError):
    """A truncated series left more mass behind than the caller accepts."""
