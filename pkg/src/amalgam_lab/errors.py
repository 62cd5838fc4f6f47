"""Exception types raised by the norm engines, sweeps and CLI."""


class AmalgamLabError(Exception):
    """Base class for every error raised by this package."""


class InvalidParam(AmalgamLabError, ValueError):
    pass


class TailTruncation(AmalgamLabError, ValueError):
    """A sampled function does not decay at the edge of its grid."""


class OffGridShift(AmalgamLabError, ValueError):
    pass


class GridMismatch(AmalgamLabError, ValueError):
    pass


class SupportViolation(AmalgamLabError, ValueError):
    pass


class GridInadequate(AmalgamLabError, ValueError):
    """The grid cannot represent the dilated function at parameter ``lam``."""

    def __init__(self, lam, reason):
        self.lam = lam
        self.reason = reason
        super().__init__(f"grid inadequate at lambda={lam:g}: {reason}")


class DegenerateFit(AmalgamLabError, ValueError):
    pass


class ConfigError(AmalgamLabError, ValueError):
    pass
