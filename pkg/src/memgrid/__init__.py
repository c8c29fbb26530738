"""Simulation of flux-controlled memristive crossbar arrays with selector switches."""

from .applications import SignedSplit, least_squares, make_signed_split, matvec, matvec_signed
from .devices import (
    AssumptionReport,
    MemductanceModel,
    flux_from_memductance,
    lipschitz_bound,
    memductance,
    verify_assumptions,
)
from .errors import (
    DimensionError,
    DomainError,
    GainError,
    GridError,
    IterationLimit,
    MemgridError,
    RangeError,
    ScheduleError,
    SignalGapError,
    SwitchError,
)
from .network import (
    CrossbarState,
    PiecewiseConstantSignal,
    TerminalCurrents,
    TerminalPotentials,
    advance,
    branch_voltages,
    build_incidence,
    terminal_currents,
)
from .protocols import (
    ReadSchedule,
    WriteConfig,
    WriteTrace,
    make_read_schedule,
    read_array,
    read_pulse_waveform,
    reachable_without_switches,
    write_array,
    write_cell,
)

__version__ = "0.1.0"
