"""Crossbar array with selector switches.

Flux is stored column-major: cell ``(k, l)`` (0-based) lives at index
``k + m * l``. Column terminals carry potentials ``p_a`` (length n), row
terminals ``p_b`` (length m). With all inputs piecewise constant the flux is
piecewise linear in time, so :func:`advance` integrates exactly.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional, Sequence

import numpy as np

from .devices import AFFINE, MemductanceModel, memductance
from .errors import DimensionError, DomainError, SignalGapError


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def cell_index(k: int, l: int, m: int) -> int:
    """Column-major flux index of 0-based cell ``(k, l)``."""
    return k + m * l


@dataclass(frozen=True, eq=False)
class CrossbarState:
    m: int
    n: int
    models: tuple
    phi: np.ndarray
    switches: np.ndarray

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise DimensionError(f"array needs m, n >= 1, got {self.m}x{self.n}")
        models = self.models
        if isinstance(models, MemductanceModel):
            models = tuple(tuple(models for _ in range(self.n)) for _ in range(self.m))
        else:
            models = tuple(tuple(row) for row in models)
        if len(models) != self.m or any(len(row) != self.n for row in models):
            raise DimensionError(f"model grid must be {self.m}x{self.n}")
        phi = np.array(self.phi, dtype=float).reshape(-1)
        if phi.size != self.m * self.n:
            raise DimensionError(f"flux vector has length {phi.size}, expected {self.m * self.n}")
        sw = np.array(self.switches, dtype=bool)
        if sw.shape != (self.m, self.n):
            raise DimensionError(f"switch grid has shape {sw.shape}, expected {(self.m, self.n)}")
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "phi", _frozen(phi))
        object.__setattr__(self, "switches", _frozen(sw))
        lo, hi = self.flux_bounds
        bad = np.flatnonzero((phi < lo) | (phi > hi))
        if bad.size:
            k, l = int(bad[0] % self.m), int(bad[0] // self.m)
            raise DomainError(f"flux {phi[bad[0]]} of cell ({k + 1}, {l + 1}) outside its model domain")

    @classmethod
    def uniform(cls, m: int, n: int, model: MemductanceModel, phi=None, switches=None) -> "CrossbarState":
        if phi is None:
            phi = np.zeros(m * n)
        if switches is None:
            switches = np.ones((m, n), dtype=bool)
        return cls(m, n, model, phi, switches)

    def with_phi(self, phi) -> "CrossbarState":
        return CrossbarState(self.m, self.n, self.models, phi, self.switches)

    def with_switches(self, switches) -> "CrossbarState":
        return CrossbarState(self.m, self.n, self.models, self.phi, switches)

    def model(self, k: int, l: int) -> MemductanceModel:
        return self.models[k][l]

    def flux(self, k: int, l: int) -> float:
        return float(self.phi[cell_index(k, l, self.m)])

    def flux_matrix(self) -> np.ndarray:
        return self.phi.reshape((self.m, self.n), order="F")

    @cached_property
    def _model_groups(self) -> list:
        groups: dict = {}
        for l in range(self.n):
            for k in range(self.m):
                groups.setdefault(self.models[k][l], []).append(cell_index(k, l, self.m))
        return [(model, np.array(idx)) for model, idx in groups.items()]

    @cached_property
    def flux_bounds(self) -> tuple:
        lo = np.full(self.m * self.n, -math.inf)
        hi = np.full(self.m * self.n, math.inf)
        for l in range(self.n):
            for k in range(self.m):
                model = self.models[k][l]
                if model.kind == AFFINE:
                    i = cell_index(k, l, self.m)
                    lo[i], hi[i] = model.phi_lo, model.phi_hi
        return lo, hi

    def memductances(self) -> np.ndarray:
        """Memductance of every cell as an m x n matrix."""
        w = np.empty(self.m * self.n)
        for model, idx in self._model_groups:
            w[idx] = memductance(model, self.phi[idx])
        return w.reshape((self.m, self.n), order="F")


@dataclass(frozen=True, eq=False)
class TerminalPotentials:
    p_a: np.ndarray
    p_b: np.ndarray

    def __post_init__(self):
        p_a = _frozen(np.array(self.p_a, dtype=float).reshape(-1))
        p_b = _frozen(np.array(self.p_b, dtype=float).reshape(-1))
        if not (np.all(np.isfinite(p_a)) and np.all(np.isfinite(p_b))):
            raise ValueError("terminal potentials must be finite")
        object.__setattr__(self, "p_a", p_a)
        object.__setattr__(self, "p_b", p_b)

    @classmethod
    def zeros(cls, m: int, n: int) -> "TerminalPotentials":
        return cls(np.zeros(n), np.zeros(m))

    def __add__(self, other: "TerminalPotentials") -> "TerminalPotentials":
        return TerminalPotentials(self.p_a + other.p_a, self.p_b + other.p_b)

    def __mul__(self, alpha: float) -> "TerminalPotentials":
        return TerminalPotentials(alpha * self.p_a, alpha * self.p_b)

    __rmul__ = __mul__

    def stacked(self) -> np.ndarray:
        """The full potential vector ``[p_a; p_b]``."""
        return np.concatenate([self.p_a, self.p_b])


@dataclass(frozen=True, eq=False)
class TerminalCurrents:
    j_a: np.ndarray
    j_b: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.j_a, self.j_b])


@dataclass(frozen=True, eq=False)
class PiecewiseConstantSignal:
    """Right-continuous step function: ``values[i]`` holds on ``[breakpoints[i], breakpoints[i+1])``.

    The last value holds up to ``end`` (default: forever). ``switches[i]``
    optionally fixes the switch grid on interval ``i``; ``None`` keeps
    whatever pattern the array already has.
    """

    breakpoints: tuple
    values: tuple
    switches: tuple = field(default=None)
    end: float = math.inf

    def __post_init__(self):
        bps = tuple(float(t) for t in self.breakpoints)
        values = tuple(self.values)
        if not bps or bps[0] != 0.0:
            raise ValueError("first breakpoint must be 0")
        if any(b >= a for a, b in zip(bps[1:], bps)):
            raise ValueError("breakpoints must be strictly increasing")
        if len(values) != len(bps):
            raise ValueError("need one value per interval")
        if not self.end > bps[-1]:
            raise ValueError("signal end must follow the last breakpoint")
        switches = self.switches
        if switches is None:
            switches = (None,) * len(bps)
        switches = tuple(None if s is None else _frozen(np.array(s, dtype=bool)) for s in switches)
        if len(switches) != len(bps):
            raise ValueError("need one switch entry per interval")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "switches", switches)

    @classmethod
    def constant(cls, p: TerminalPotentials, switches=None, end: float = math.inf) -> "PiecewiseConstantSignal":
        return cls((0.0,), (p,), (switches,), end)

    def _locate(self, t: float) -> int:
        if t < 0 or t >= self.end:
            raise SignalGapError(f"signal undefined at t={t}")
        return bisect.bisect_right(self.breakpoints, t) - 1

    def value_at(self, t: float) -> TerminalPotentials:
        return self.values[self._locate(t)]

    def switches_at(self, t: float):
        return self.switches[self._locate(t)]

    def left_limit(self, t: float) -> TerminalPotentials:
        """Value just before ``t`` (the one in force on the interval ending at ``t``)."""
        if t <= 0 or t > self.end:
            raise SignalGapError(f"no left limit at t={t}")
        return self.values[bisect.bisect_left(self.breakpoints, t) - 1]

    def pieces(self, t_from: float, t_to: float) -> Iterator[tuple]:
        """Yield ``(start, stop, value, switches)`` covering ``[t_from, t_to)``."""
        if t_from < 0 or t_to > self.end:
            raise SignalGapError(f"signal defined on [0, {self.end}), asked for [{t_from}, {t_to})")
        if t_to <= t_from:
            return
        i = self._locate(t_from)
        bps = self.breakpoints
        start = t_from
        while start < t_to:
            stop = bps[i + 1] if i + 1 < len(bps) else math.inf
            stop = min(stop, t_to)
            yield start, stop, self.values[i], self.switches[i]
            start = stop
            i += 1

    def __add__(self, other: "PiecewiseConstantSignal") -> "PiecewiseConstantSignal":
        return superpose([self, other])


def superpose(signals: Sequence[PiecewiseConstantSignal]) -> PiecewiseConstantSignal:
    """Sum of potential signals on the union of their breakpoints.

    Switch entries are carried over only if no two signals disagree on an interval.
    """
    bps = sorted(set().union(*(s.breakpoints for s in signals)))
    end = min(s.end for s in signals)
    bps = [t for t in bps if t < end]
    values, switches = [], []
    for t in bps:
        total = None
        sw = None
        for s in signals:
            v = s.value_at(t)
            total = v if total is None else total + v
            si = s.switches_at(t)
            if si is not None:
                if sw is not None and not np.array_equal(sw, si):
                    raise ValueError(f"conflicting switch patterns at t={t}")
                sw = si
        values.append(total)
        switches.append(sw)
    return PiecewiseConstantSignal(tuple(bps), tuple(values), tuple(switches), end)


def build_incidence(m: int, n: int) -> np.ndarray:
    """Incidence matrix ``[I_n kron 1_m^T; -1_n^T kron I_m]`` of shape (n+m, mn)."""
    if m < 1 or n < 1:
        raise DimensionError("m and n must be at least 1")
    top = np.kron(np.eye(n), np.ones((1, m)))
    bottom = -np.kron(np.ones((1, n)), np.eye(m))
    return np.vstack([top, bottom])


def _check_potentials(state: CrossbarState, p: TerminalPotentials) -> None:
    if p.p_a.shape != (state.n,) or p.p_b.shape != (state.m,):
        raise DimensionError(
            f"potentials have shapes {p.p_a.shape}/{p.p_b.shape}, array is {state.m}x{state.n}"
        )


def _voltage_matrix(switches: np.ndarray, p: TerminalPotentials) -> np.ndarray:
    return np.where(switches, p.p_a[None, :] - p.p_b[:, None], 0.0)


def branch_voltages(state: CrossbarState, p: TerminalPotentials) -> np.ndarray:
    """Per-cell voltages ``s_kl * (P_l^A - P_k^B)``, column-major."""
    _check_potentials(state, p)
    return _voltage_matrix(state.switches, p).reshape(-1, order="F")


def terminal_currents(state: CrossbarState, p: TerminalPotentials) -> TerminalCurrents:
    _check_potentials(state, p)
    v = _voltage_matrix(state.switches, p)
    # open cells carry no current; their memductance is never needed
    i = np.zeros((state.m, state.n))
    closed = state.switches
    if closed.all():
        i = state.memductances() * v
    elif closed.any():
        ks, ls = np.nonzero(closed)
        for k, l in zip(ks, ls):
            i[k, l] = memductance(state.models[k][l], state.phi[cell_index(k, l, state.m)]) * v[k, l]
    return TerminalCurrents(i.sum(axis=0), -i.sum(axis=1))


def power(p: TerminalPotentials, j: TerminalCurrents) -> float:
    """Instantaneous power ``P^T J`` absorbed by the array."""
    return float(p.stacked() @ j.stacked())


def _step(state: CrossbarState, switches: np.ndarray, p: TerminalPotentials, t0: float, t1: float) -> CrossbarState:
    dt = t1 - t0
    v = _voltage_matrix(switches, p).reshape(-1, order="F")
    phi = state.phi + dt * v
    lo, hi = state.flux_bounds
    out = (phi < lo) | (phi > hi)
    if out.any():
        idx = int(np.flatnonzero(out)[0])
        bound = lo[idx] if phi[idx] < lo[idx] else hi[idx]
        t_cross = t0 + (bound - state.phi[idx]) / v[idx]
        k, l = idx % state.m, idx // state.m
        raise DomainError(
            f"flux of cell ({k + 1}, {l + 1}) leaves its model domain at t={t_cross:.6g} "
            f"(would reach {phi[idx]:.6g})"
        )
    return CrossbarState(state.m, state.n, state.models, phi, switches)


def advance(state: CrossbarState, signal: PiecewiseConstantSignal, t_from: float, t_to: float) -> CrossbarState:
    """Integrate ``dphi/dt = S D^T P`` exactly from ``t_from`` to ``t_to``."""
    if t_to < t_from:
        raise ValueError(f"t_to={t_to} precedes t_from={t_from}")
    for t0, t1, p, sw in signal.pieces(t_from, t_to):
        _check_potentials(state, p)
        state = _step(state, state.switches if sw is None else sw, p, t0, t1)
    return state


def measure(state: CrossbarState, signal: PiecewiseConstantSignal, t: float, left: bool = False) -> TerminalCurrents:
    """Terminal currents at time ``t`` for an array whose flux is already at ``t``.

    ``left=True`` uses the input in force just before ``t``.
    """
    if left:
        p = signal.left_limit(t)
        idx = bisect.bisect_left(signal.breakpoints, t) - 1
        sw = signal.switches[idx]
    else:
        p = signal.value_at(t)
        sw = signal.switches_at(t)
    if sw is not None:
        state = state.with_switches(sw)
    return terminal_currents(state, p)


@dataclass
class TraceRow:
    time: float
    p: TerminalPotentials
    j: TerminalCurrents
    phi: Optional[np.ndarray] = None


def simulate(
    state: CrossbarState,
    signal: PiecewiseConstantSignal,
    times: Sequence[float],
    record_flux: bool = False,
) -> tuple:
    """Advance through sorted sample ``times`` from 0, recording terminal values at each.

    Returns ``(final_state, rows)``.
    """
    rows = []
    t_prev = 0.0
    for t in times:
        state = advance(state, signal, t_prev, t)
        t_prev = t
        if t < signal.end:
            p = signal.value_at(t)
            j = measure(state, signal, t)
        else:
            p = signal.left_limit(t)
            j = measure(state, signal, t, left=True)
        rows.append(TraceRow(t, p, j, state.phi.copy() if record_flux else None))
    return state, rows
