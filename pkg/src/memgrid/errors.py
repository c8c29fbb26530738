"""Exception hierarchy shared by all memgrid modules."""


class MemgridError(Exception):
    """Base class for every error raised by memgrid."""


class DomainError(MemgridError, ValueError):
    """A flux value lies outside a device model's validity interval."""


class RangeError(MemgridError, ValueError):
    """A requested memductance is not realizable by the device."""


class GridError(MemgridError, ValueError):
    pass


class DimensionError(MemgridError, ValueError):
    pass


class SignalGapError(MemgridError, ValueError):
    """The input signal is undefined on part of the requested time span."""


class ScheduleError(MemgridError, ValueError):
    pass


class SwitchError(MemgridError, ValueError):
    pass


class GainError(MemgridError, ValueError):
    """Controller gain violates the convergence bound alpha*T < 2/beta."""


class IterationLimit(MemgridError, RuntimeError):
    pass
