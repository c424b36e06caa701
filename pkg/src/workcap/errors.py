"""Exception hierarchy shared by all workcap modules."""


class WorkcapError(Exception):
    """Base class for all library errors."""


class NonHermitian(WorkcapError, ValueError):
    pass


class DimensionMismatch(WorkcapError, ValueError):
    pass


class DimensionCap(WorkcapError, ValueError):
    pass


class InvalidState(WorkcapError, ValueError):
    """Trace not one, or eigenvalues more negative than the clipping tolerance."""


class NotTracePreserving(WorkcapError, ValueError):
    pass


class NotCP(WorkcapError, ValueError):
    """Choi matrix of a requested map has a significantly negative eigenvalue."""


class InvalidParams(WorkcapError, ValueError):
    pass


class TargetOutOfRange(WorkcapError, ValueError):
    pass


class EnergyOutOfRange(WorkcapError, ValueError):
    pass


class EmptyCurve(WorkcapError, ValueError):
    pass


class NoConvergence(WorkcapError, RuntimeError):
    pass
