"""Flux-controlled memristor models.

A device is described by its charge function ``g`` and the memductance
``W = dg/dphi``. Two families are provided:

* ``sigmoid``: ``W(phi) = w_min + (w_max - w_min) * sigmoid(c * phi)``, valid on
  the whole real line.
* ``affine``: ``W(phi) = a0 + a1 * phi`` restricted to ``[phi_lo, phi_hi]``.

Both are positive, strictly increasing and Lipschitz, which is all the read
and write protocols rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.special import expit, logit

from .errors import DomainError, GridError, RangeError

SIGMOID = "sigmoid"
AFFINE = "affine"


@dataclass(frozen=True)
class MemductanceModel:
    kind: str = SIGMOID
    w_min: float = 1.0
    w_max: float = 3.0
    c: float = 1.0
    a0: float = 1.0
    a1: float = 0.5
    phi_lo: float = 0.0
    phi_hi: float = 4.0

    def __post_init__(self):
        if self.kind == SIGMOID:
            if not (0 < self.w_min < self.w_max):
                raise ValueError(f"sigmoid model needs 0 < w_min < w_max, got {self.w_min}, {self.w_max}")
            if not self.c > 0:
                raise ValueError(f"sigmoid model needs c > 0, got {self.c}")
        elif self.kind == AFFINE:
            if not self.a1 > 0:
                raise ValueError(f"affine model needs a1 > 0, got {self.a1}")
            if not self.phi_lo < self.phi_hi:
                raise ValueError("affine model needs phi_lo < phi_hi")
            if not self.a0 + self.a1 * self.phi_lo > 0:
                raise ValueError("affine model must stay positive on its flux interval")
        else:
            raise ValueError(f"unknown model kind {self.kind!r}")

    @classmethod
    def sigmoid(cls, w_min: float = 1.0, w_max: float = 3.0, c: float = 1.0) -> "MemductanceModel":
        return cls(SIGMOID, w_min=float(w_min), w_max=float(w_max), c=float(c))

    @classmethod
    def affine(cls, a0: float, a1: float, phi_lo: float, phi_hi: float) -> "MemductanceModel":
        return cls(AFFINE, a0=float(a0), a1=float(a1), phi_lo=float(phi_lo), phi_hi=float(phi_hi))

    @property
    def domain(self) -> tuple[float, float]:
        if self.kind == SIGMOID:
            return (-math.inf, math.inf)
        return (self.phi_lo, self.phi_hi)

    @property
    def range(self) -> tuple[float, float]:
        """Memductance range: open for sigmoid, closed for affine."""
        if self.kind == SIGMOID:
            return (self.w_min, self.w_max)
        return (self.a0 + self.a1 * self.phi_lo, self.a0 + self.a1 * self.phi_hi)

    def in_domain(self, phi) -> bool:
        lo, hi = self.domain
        phi = np.asarray(phi, dtype=float)
        return bool(np.all((phi >= lo) & (phi <= hi)))

    def to_dict(self) -> dict[str, Any]:
        if self.kind == SIGMOID:
            return {"kind": SIGMOID, "w_min": self.w_min, "w_max": self.w_max, "c": self.c}
        return {"kind": AFFINE, "a0": self.a0, "a1": self.a1, "phi_lo": self.phi_lo, "phi_hi": self.phi_hi}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MemductanceModel":
        kind = d.get("kind", SIGMOID)
        if kind == SIGMOID:
            return cls.sigmoid(d["w_min"], d["w_max"], d["c"])
        if kind == AFFINE:
            return cls.affine(d["a0"], d["a1"], d["phi_lo"], d["phi_hi"])
        raise ValueError(f"unknown model kind {kind!r}")


def parse_model(text: str) -> MemductanceModel:
    """Parse ``sigmoid:w_min,w_max,c`` or ``affine:a0,a1,phi_lo,phi_hi``."""
    kind, _, params = text.partition(":")
    values = [float(v) for v in params.split(",")] if params else []
    if kind == SIGMOID:
        if len(values) != 3:
            raise ValueError("sigmoid model takes w_min,w_max,c")
        return MemductanceModel.sigmoid(*values)
    if kind == AFFINE:
        if len(values) != 4:
            raise ValueError("affine model takes a0,a1,phi_lo,phi_hi")
        return MemductanceModel.affine(*values)
    raise ValueError(f"unknown model kind {kind!r}")


def _check_domain(model: MemductanceModel, phi: np.ndarray) -> None:
    if model.kind == AFFINE and not model.in_domain(phi):
        raise DomainError(
            f"flux {phi} outside affine validity interval [{model.phi_lo}, {model.phi_hi}]"
        )


def memductance(model: MemductanceModel, phi):
    """Memductance ``W(phi)``; accepts scalars or arrays."""
    x = np.asarray(phi, dtype=float)
    _check_domain(model, x)
    if model.kind == SIGMOID:
        w = model.w_min + (model.w_max - model.w_min) * expit(model.c * x)
    else:
        w = model.a0 + model.a1 * x
    return float(w) if w.ndim == 0 else w


def charge(model: MemductanceModel, phi):
    """Charge ``g(phi)`` in closed form (integration constant fixed by the formula)."""
    x = np.asarray(phi, dtype=float)
    _check_domain(model, x)
    if model.kind == SIGMOID:
        q = model.w_min * x + (model.w_max - model.w_min) / model.c * np.logaddexp(0.0, model.c * x)
    else:
        q = model.a0 * x + 0.5 * model.a1 * x * x
    return float(q) if q.ndim == 0 else q


def flux_from_memductance(model: MemductanceModel, w: float) -> float:
    """Unique flux ``phi`` with ``W(phi) = w``.

    Raises RangeError when ``w`` is not realizable by this device.
    """
    w = float(w)
    lo, hi = model.range
    if model.kind == SIGMOID:
        if not lo < w < hi:
            raise RangeError(f"memductance {w} outside realizable range ({lo}, {hi})")
        return float(logit((w - model.w_min) / (model.w_max - model.w_min)) / model.c)
    if not lo <= w <= hi:
        raise RangeError(f"memductance {w} outside realizable range [{lo}, {hi}]")
    phi = (w - model.a0) / model.a1
    return min(max(phi, model.phi_lo), model.phi_hi)


def lipschitz_bound(model: MemductanceModel) -> float:
    if model.kind == SIGMOID:
        return model.c * (model.w_max - model.w_min) / 4.0
    return model.a1


@dataclass
class AssumptionReport:
    positive: bool
    monotone: bool
    lipschitz_ok: bool
    w_min_grid: float
    beta_hat: float
    beta: float
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.positive and self.monotone and self.lipschitz_ok

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "positive": self.positive,
            "monotone": self.monotone,
            "lipschitz_ok": self.lipschitz_ok,
            "w_min_grid": self.w_min_grid,
            "beta_hat": self.beta_hat,
            "beta": self.beta,
            "violations": list(self.violations),
        }


def verify_assumptions(model: MemductanceModel, grid) -> AssumptionReport:
    """Audit positivity, strict monotonicity and the Lipschitz bound on a flux grid."""
    phi = np.asarray(grid, dtype=float)
    if phi.ndim != 1 or phi.size < 3:
        raise GridError("grid must be a 1-D sequence of at least 3 points")
    if not np.all(np.diff(phi) > 0):
        raise GridError("grid must be strictly increasing")
    if not model.in_domain(phi):
        raise GridError("grid leaves the model's flux domain")

    w = memductance(model, phi)
    dw = np.diff(w)
    slopes = dw / np.diff(phi)
    beta = lipschitz_bound(model)
    beta_hat = float(np.max(np.abs(slopes)))

    violations = []
    positive = bool(np.min(w) > 0)
    if not positive:
        violations.append("memductance not positive on grid")
    monotone = bool(np.all(dw > 0))
    if not monotone:
        bad = int(np.argmin(dw > 0))
        violations.append(f"not strictly increasing between grid points {bad} and {bad + 1}")
    lipschitz_ok = beta_hat <= beta * (1 + 1e-9)
    if not lipschitz_ok:
        violations.append(f"empirical slope {beta_hat} exceeds bound {beta}")
    return AssumptionReport(positive, monotone, lipschitz_ok, float(np.min(w)), beta_hat, beta, violations)
