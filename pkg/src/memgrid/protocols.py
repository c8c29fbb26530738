"""Terminal-only controllers: reading, writing, and switchless reachability.

Cell and column indices are 0-based throughout the Python API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .devices import flux_from_memductance, lipschitz_bound, memductance
from .errors import DimensionError, GainError, IterationLimit, RangeError, ScheduleError, SwitchError
from .network import (
    CrossbarState,
    PiecewiseConstantSignal,
    TerminalPotentials,
    advance,
    build_incidence,
    measure,
    superpose,
    terminal_currents,
)

# slack for default schedules whose spacing is 4*tau up to rounding
_SCHEDULE_RTOL = 1e-12


# ---------------------------------------------------------------------------
# reading


@dataclass(frozen=True)
class ReadSchedule:
    tau: float
    amplitude: float
    times: tuple

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        _validate_schedule(self.tau, self.amplitude, self.times)

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def horizon(self) -> float:
        return self.times[-1] + 2 * self.tau


def _validate_schedule(tau: float, amplitude: float, times: Sequence[float]) -> None:
    if not tau > 0:
        raise ScheduleError(f"pulse half-width must be positive, got {tau}")
    if amplitude == 0 or not math.isfinite(amplitude):
        raise ScheduleError("pulse amplitude must be finite and nonzero")
    if len(times) == 0:
        raise ScheduleError("schedule needs at least one measurement time")
    slack = _SCHEDULE_RTOL * max(1.0, abs(times[-1]))
    if times[0] < 2 * tau - slack:
        raise ScheduleError(f"first measurement t_1={times[0]} is earlier than 2*tau={2 * tau}")
    for l in range(len(times) - 1):
        if times[l + 1] - times[l] < 4 * tau - slack:
            raise ScheduleError(
                f"measurements {l + 1} and {l + 2} are {times[l + 1] - times[l]} apart, "
                f"need at least 4*tau={4 * tau}"
            )


def make_read_schedule(n: int, tau: float, amplitude: float = 1.0, times: Optional[Sequence[float]] = None) -> ReadSchedule:
    """Build a read schedule; by default ``t_l = 2*tau + 4*tau*(l-1)``."""
    if times is None:
        times = [2 * tau + 4 * tau * l for l in range(n)]
    elif len(times) != n:
        raise ScheduleError(f"got {len(times)} measurement times for {n} columns")
    return ReadSchedule(float(tau), float(amplitude), tuple(times))


def zero_mean_pulse(center: float, tau: float, column_values: np.ndarray, m: int, end: float = math.inf) -> PiecewiseConstantSignal:
    """Pulse ``-v, +v, -v`` on ``[c-2tau, c-tau), [c-tau, c+tau), [c+tau, c+2tau)``, zero elsewhere."""
    n = column_values.size
    levels = [(center - 2 * tau, -column_values), (center - tau, column_values),
              (center + tau, -column_values), (center + 2 * tau, np.zeros(n))]
    bps, values = [0.0], [TerminalPotentials(np.zeros(n), np.zeros(m))]
    for t, v in levels:
        p = TerminalPotentials(v, np.zeros(m))
        if t <= 0.0:
            values[-1] = p
        else:
            bps.append(t)
            values.append(p)
    return PiecewiseConstantSignal(tuple(bps), tuple(values), None, end)


def read_pulse_waveform(schedule: ReadSchedule, l: int, m: int = 1) -> PiecewiseConstantSignal:
    """Column ``l`` read pulse (other columns and all rows held at 0)."""
    if not 0 <= l < schedule.n:
        raise IndexError(f"column {l} out of range for a {schedule.n}-column schedule")
    v = np.zeros(schedule.n)
    v[l] = schedule.amplitude
    return zero_mean_pulse(schedule.times[l], schedule.tau, v, m)


def read_signal(schedule: ReadSchedule, m: int) -> PiecewiseConstantSignal:
    """All column pulses of a schedule superposed into one input signal."""
    return superpose([read_pulse_waveform(schedule, l, m) for l in range(schedule.n)])


def read_array(state: CrossbarState, schedule: ReadSchedule) -> tuple:
    """Read every memductance from terminal currents, restoring the flux.

    Returns ``(w_hat, state_after)``; ``w_hat[k, l] = -J_k^B(t_l) / a``.
    """
    if not state.switches.all():
        raise SwitchError("reading requires all switches closed")
    if schedule.n != state.n:
        raise DimensionError(f"schedule has {schedule.n} pulses for {state.n} columns")
    signal = read_signal(schedule, state.m)
    w_hat = np.empty((state.m, state.n))
    t = 0.0
    for l, t_l in enumerate(schedule.times):
        state = advance(state, signal, t, t_l)
        t = t_l
        w_hat[:, l] = -measure(state, signal, t_l).j_b / schedule.amplitude
    state = advance(state, signal, t, schedule.horizon)
    return w_hat, state


# ---------------------------------------------------------------------------
# writing


@dataclass(frozen=True)
class WriteConfig:
    alpha: float
    period: float
    epsilon: float = 1e-3
    probe: float = 1.0
    max_iters: int = 100_000

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"gain alpha must be positive, got {self.alpha}")
        if not self.period > 0:
            raise ValueError(f"period T must be positive, got {self.period}")
        if not self.epsilon > 0:
            raise ValueError(f"tolerance epsilon must be positive, got {self.epsilon}")
        if self.probe == 0:
            raise ValueError("probe voltage must be nonzero")

    def check_gain(self, beta: float) -> None:
        if not self.alpha * self.period < 2.0 / beta:
            raise GainError(
                f"alpha*T = {self.alpha * self.period:.6g} violates alpha*T < 2/beta = {2.0 / beta:.6g}"
            )


@dataclass
class WriteTrace:
    """Per-iteration record of the single-cell write controller.

    Row 0 is the initial condition (no voltage applied yet, ``P``/``J`` are NaN);
    row ``i >= 1`` holds the flux at ``i*T``, the voltage applied on
    ``((i-1)T, iT]``, the current measured at ``iT`` and ``W = -J/P``.
    """

    k: int
    l: int
    w_target: float
    phi_target: float
    period: float
    phi: list = field(default_factory=list)
    p: list = field(default_factory=list)
    j: list = field(default_factory=list)
    w_inferred: list = field(default_factory=list)
    lyapunov: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.phi) - 1

    @property
    def t_hat(self) -> float:
        return self.iterations * self.period

    def record(self, phi: float, p: float, j: float, w: float) -> None:
        self.phi.append(phi)
        self.p.append(p)
        self.j.append(j)
        self.w_inferred.append(w)
        self.lyapunov.append((phi - self.phi_target) ** 2)

    def rows(self) -> list:
        return [
            (i, self.phi[i], self.p[i], self.j[i], self.w_inferred[i], self.lyapunov[i])
            for i in range(len(self.phi))
        ]


class _CellController:
    """Single-cell write controller driven only by the measured row current."""

    def __init__(self, state: CrossbarState, k: int, l: int, w_target: float, cfg: WriteConfig):
        model = state.model(k, l)
        self.k, self.l, self.cfg = k, l, cfg
        self.w_target = float(w_target)
        phi0 = state.flux(k, l)
        # W(phi(0)) is assumed known from a prior read
        w0 = memductance(model, phi0)
        self.trace = WriteTrace(k, l, self.w_target, flux_from_memductance(model, w_target), cfg.period)
        self.trace.record(phi0, math.nan, math.nan, w0)
        self.done = abs(self.w_target - w0) <= cfg.epsilon
        self.trace.converged = self.done
        self.voltage = cfg.probe

    def observe(self, j: float, phi: float) -> None:
        p = self.voltage
        w_inferred = -j / p
        self.trace.record(phi, p, j, w_inferred)
        error = self.w_target - w_inferred
        if abs(error) <= self.cfg.epsilon:
            self.done = True
            self.trace.converged = True
            return
        if self.trace.iterations >= self.cfg.max_iters:
            raise IterationLimit(
                f"cell ({self.k + 1}, {self.l + 1}) not within {self.cfg.epsilon} of "
                f"{self.w_target} after {self.cfg.max_iters} iterations (last W={w_inferred})"
            )
        self.voltage = self.cfg.alpha * error
        if abs(self.voltage) < 1e-15:
            raise IterationLimit(
                f"cell ({self.k + 1}, {self.l + 1}) control voltage {self.voltage} vanished "
                f"with error {error} still above epsilon"
            )


def _prepare(state: CrossbarState, k: int, l: int, w_target: float, cfg: WriteConfig) -> None:
    if not (0 <= k < state.m and 0 <= l < state.n):
        raise IndexError(f"cell ({k}, {l}) outside a {state.m}x{state.n} array")
    model = state.model(k, l)
    try:
        flux_from_memductance(model, w_target)
    except RangeError as exc:
        raise RangeError(f"cell ({k + 1}, {l + 1}): {exc}") from None
    try:
        cfg.check_gain(lipschitz_bound(model))
    except GainError as exc:
        raise GainError(f"cell ({k + 1}, {l + 1}): {exc}") from None


def _run_group(state: CrossbarState, controllers: list, cfg: WriteConfig) -> CrossbarState:
    """Drive cells that share no row or column simultaneously until each stops."""
    active = [c for c in controllers if not c.done]
    rows = {c.k for c in active}
    cols = {c.l for c in active}
    if len(rows) != len(active) or len(cols) != len(active):
        raise ValueError("simultaneously written cells must occupy distinct rows and columns")
    zeros_b = np.zeros(state.m)
    while active:
        switches = np.zeros((state.m, state.n), dtype=bool)
        p_a = np.zeros(state.n)
        for c in active:
            switches[c.k, c.l] = True
            p_a[c.l] = c.voltage
        p = TerminalPotentials(p_a, zeros_b)
        signal = PiecewiseConstantSignal.constant(p, switches)
        state = advance(state, signal, 0.0, cfg.period)
        # left-limit measurement: the input that produced the current flux
        j_b = terminal_currents(state, signal.left_limit(cfg.period)).j_b
        for c in active:
            c.observe(float(j_b[c.k]), state.flux(c.k, c.l))
        active = [c for c in active if not c.done]
    return state


def _select(state: CrossbarState, cells: Sequence[tuple]) -> CrossbarState:
    switches = np.zeros((state.m, state.n), dtype=bool)
    for k, l in cells:
        switches[k, l] = True
    return state.with_switches(switches)


def write_cell(state: CrossbarState, k: int, l: int, w_target: float, cfg: WriteConfig) -> tuple:
    """Steer cell ``(k, l)`` to within ``cfg.epsilon`` of ``w_target``.

    Only the selected switch is closed, so every other flux is untouched.
    Returns ``(state_after, trace)``.
    """
    _prepare(state, k, l, w_target, cfg)
    ctrl = _CellController(state, k, l, w_target, cfg)
    if ctrl.done:
        return state, ctrl.trace
    state = _select(state, [(k, l)])
    state = _run_group(state, [ctrl], cfg)
    return state, ctrl.trace


def diagonal_groups(m: int, n: int) -> list:
    """Partition the cells into ``max(m, n)`` groups ``{(k, l): (l - k) mod max(m, n) = d}``."""
    size = max(m, n)
    groups = [[] for _ in range(size)]
    for k in range(m):
        for l in range(n):
            groups[(l - k) % size].append((k, l))
    return groups


def write_array(state: CrossbarState, w_target, cfg: WriteConfig, mode: str = "sequential") -> tuple:
    """Write a whole target matrix, one cell at a time or one diagonal at a time.

    The original switch pattern is restored at the end. Returns
    ``(state_after, traces)`` with ``traces[(k, l)]`` the per-cell record.
    """
    target = np.asarray(w_target, dtype=float)
    if target.shape != (state.m, state.n):
        raise DimensionError(f"target has shape {target.shape}, array is {state.m}x{state.n}")
    for k in range(state.m):
        for l in range(state.n):
            _prepare(state, k, l, target[k, l], cfg)

    if mode == "sequential":
        groups = [[(k, l)] for k in range(state.m) for l in range(state.n)]
    elif mode == "diagonal":
        groups = diagonal_groups(state.m, state.n)
    else:
        raise ValueError(f"unknown write mode {mode!r}")

    original = state.switches
    traces = {}
    for cells in groups:
        ctrls = [_CellController(state, k, l, target[k, l], cfg) for k, l in cells]
        state = _run_group(_select(state, cells), ctrls, cfg)
        for c in ctrls:
            traces[(c.k, c.l)] = c.trace
    return state.with_switches(original), traces


# ---------------------------------------------------------------------------
# reachability with all switches closed


def reachable_without_switches(state: CrossbarState, phi_target) -> bool:
    """Whether ``phi_target - phi`` lies in the range of ``D^T``."""
    target = np.asarray(phi_target, dtype=float).reshape(-1)
    if target.size != state.m * state.n:
        raise DimensionError(f"target flux has length {target.size}, expected {state.m * state.n}")
    delta = target - state.phi
    dt = build_incidence(state.m, state.n).T
    coef, *_ = np.linalg.lstsq(dt, delta, rcond=None)
    residual = delta - dt @ coef
    return bool(np.linalg.norm(residual) <= 1e-9 * (np.linalg.norm(delta) + 1))
