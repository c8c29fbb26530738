"""Array state persistence (canonical JSON) and CSV trace export."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

import numpy as np

from .devices import MemductanceModel
from .errors import DimensionError
from .network import CrossbarState

SCHEMA_VERSION = 1


def state_to_dict(state: CrossbarState) -> dict:
    flat = {model for row in state.models for model in row}
    if len(flat) == 1:
        model = next(iter(flat)).to_dict()
    else:
        model = [[mdl.to_dict() for mdl in row] for row in state.models]
    return {
        "schema_version": SCHEMA_VERSION,
        "m": state.m,
        "n": state.n,
        "model": model,
        "flux": [float(x) for x in state.phi],
        "switches": [int(s) for s in state.switches.reshape(-1, order="F")],
    }


def state_from_dict(d: dict) -> CrossbarState:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
    m, n = int(d["m"]), int(d["n"])
    raw = d["model"]
    if isinstance(raw, dict):
        models = MemductanceModel.from_dict(raw)
    else:
        models = [[MemductanceModel.from_dict(x) for x in row] for row in raw]
    switches = np.asarray(d["switches"], dtype=int)
    if switches.size != m * n:
        raise DimensionError(f"switches has length {switches.size}, expected {m * n}")
    if not np.all((switches == 0) | (switches == 1)):
        raise ValueError("switch entries must be 0 or 1")
    return CrossbarState(m, n, models, d["flux"], switches.reshape((m, n), order="F"))


def dumps(obj) -> str:
    # repr floats are shortest round-trip, so save -> load -> save is byte-identical
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_array(state: CrossbarState, path) -> None:
    atomic_write_text(path, dumps(state_to_dict(state)))


def load_array(path) -> CrossbarState:
    with open(path) as f:
        return state_from_dict(json.load(f))


def signal_trace_header(m: int, n: int, with_flux: bool = False) -> list:
    cols = ["time"]
    cols += [f"p_a{l + 1}" for l in range(n)]
    cols += [f"p_b{k + 1}" for k in range(m)]
    cols += [f"j_a{l + 1}" for l in range(n)]
    cols += [f"j_b{k + 1}" for k in range(m)]
    if with_flux:
        cols += [f"phi{i + 1}" for i in range(m * n)]
    return cols


def write_signal_trace(path, rows: Iterable, m: int, n: int, with_flux: bool = False) -> None:
    """CSV of ``network.TraceRow`` samples."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(signal_trace_header(m, n, with_flux))
        for r in rows:
            line = [r.time, *r.p.p_a, *r.p.p_b, *r.j.j_a, *r.j.j_b]
            if with_flux:
                line += list(r.phi)
            w.writerow([repr(float(x)) for x in line])


WRITE_TRACE_COLUMNS = ["iter", "phi", "P", "J", "W_inferred", "lyapunov"]


def write_write_traces(path, traces) -> None:
    """CSV of write-controller traces; several cells get leading ``k, l`` columns (1-based)."""
    traces = list(traces)
    multi = len(traces) != 1
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow((["k", "l"] if multi else []) + WRITE_TRACE_COLUMNS)
        for tr in traces:
            for i, *vals in tr.rows():
                prefix = [tr.k + 1, tr.l + 1] if multi else []
                w.writerow(prefix + [i] + [repr(float(v)) for v in vals])
