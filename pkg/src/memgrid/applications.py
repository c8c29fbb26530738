"""Analog matrix-vector products and least squares on a programmed array."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .devices import MemductanceModel, lipschitz_bound
from .errors import DimensionError, RangeError, SwitchError
from .network import CrossbarState, advance, measure
from .protocols import WriteConfig, zero_mean_pulse, write_array


def matvec(state: CrossbarState, b, tau: float = 0.25, s: Optional[float] = None, return_state: bool = False):
    """Compute ``W(phi) @ b`` with one zero-mean pulse per column centered at ``s``.

    The result is read from the row currents at ``s``; the flux is back at
    its initial value once the pulses end at ``s + 2*tau``.
    """
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size != state.n:
        raise DimensionError(f"vector has length {b.size}, array has {state.n} columns")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if s is None:
        s = 2 * tau
    if s < 2 * tau:
        raise ValueError(f"pulse center s={s} must be at least 2*tau={2 * tau}")
    if not state.switches.all():
        raise SwitchError("matrix-vector product requires all switches closed")
    signal = zero_mean_pulse(s, tau, b, state.m)
    state = advance(state, signal, 0.0, s)
    c = -measure(state, signal, s).j_b
    state = advance(state, signal, s, s + 2 * tau)
    return (c, state) if return_state else c


@dataclass(frozen=True)
class SignedSplit:
    """Two arrays whose memductance difference ``W_B - W_C`` represents a signed matrix."""

    b_part: CrossbarState
    c_part: CrossbarState

    def __post_init__(self):
        if (self.b_part.m, self.b_part.n) != (self.c_part.m, self.c_part.n):
            raise DimensionError("split arrays must have equal shape")

    def matrix(self) -> np.ndarray:
        return self.b_part.memductances() - self.c_part.memductances()


def matvec_signed(split: SignedSplit, b, tau: float = 0.25, s: Optional[float] = None) -> np.ndarray:
    return matvec(split.b_part, b, tau, s) - matvec(split.c_part, b, tau, s)


def split_targets(A, model: MemductanceModel, gamma: Optional[float] = None, margin: float = 0.05) -> tuple:
    """Memductance targets ``B = A+ + gamma``, ``C = A- + gamma`` with ``B - C = A``.

    ``gamma`` defaults to the middle of the device range; every entry must
    stay ``margin`` (fraction of the range width) away from both range ends.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    lo, hi = model.range
    width = hi - lo
    w_lo, w_hi = lo + margin * width, hi - margin * width
    if gamma is None:
        gamma = 0.5 * (lo + hi)
    if not w_lo <= gamma < w_hi:
        raise RangeError(f"offset {gamma} outside usable memductance range [{w_lo}, {w_hi})")
    peak = float(np.max(np.abs(A))) if A.size else 0.0
    if gamma + peak > w_hi:
        scale = (w_hi - gamma) / peak
        err = RangeError(
            f"matrix entries up to {peak:.6g} do not fit around offset {gamma:.6g}; "
            f"rescale A by {scale:.3g} or less"
        )
        err.scale = scale
        raise err
    return np.maximum(A, 0.0) + gamma, np.maximum(-A, 0.0) + gamma


def make_signed_split(
    A,
    model: MemductanceModel,
    cfg: Optional[WriteConfig] = None,
    gamma: Optional[float] = None,
    margin: float = 0.05,
    phi0=None,
    mode: str = "diagonal",
) -> SignedSplit:
    """Program two fresh arrays so that ``W_B - W_C = A`` within the write tolerance."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    b_target, c_target = split_targets(A, model, gamma, margin)
    if cfg is None:
        cfg = WriteConfig(alpha=1.0 / lipschitz_bound(model), period=1.0)
    parts = []
    for target in (b_target, c_target):
        state = CrossbarState.uniform(m, n, model, phi0)
        state, _ = write_array(state, target, cfg, mode)
        parts.append(state)
    return SignedSplit(*parts)


def least_squares(state: CrossbarState, c_inject) -> np.ndarray:
    """Row potentials ``y`` minimizing ``||W^T y + c||`` (minimum norm among minimizers).

    ``W`` is the m x n memductance matrix and ``c`` the n column currents.
    Solved by a complete orthogonal decomposition: pivoted QR of ``W^T``
    followed by a QR of the retained triangular rows.
    """
    c = np.asarray(c_inject, dtype=float).reshape(-1)
    if c.size != state.n:
        raise DimensionError(f"current vector has length {c.size}, array has {state.n} columns")
    K = state.memductances().T
    rhs = -c
    q, r, perm = scipy.linalg.qr(K, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return np.zeros(state.m)
    tol = max(K.shape) * np.finfo(float).eps * diag[0]
    rank = int(np.sum(diag > tol))
    r1 = r[:rank, :]
    z, u = np.linalg.qr(r1.T)
    w = scipy.linalg.solve_triangular(u.T, q[:, :rank].T @ rhs, lower=True)
    y = np.empty(state.m)
    y[perm] = z @ w
    return y
