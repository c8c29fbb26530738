"""Command-line front end.

Exit codes: 0 ok, 2 validation, 3 convergence certificate violated (or
write did not converge), 4 unrealizable target, 5 I/O.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import applications, arrayfile, devices, protocols
from .errors import GainError, IterationLimit, MemgridError, RangeError
from .network import CrossbarState, simulate

EXIT_OK, EXIT_VALIDATION, EXIT_GAIN, EXIT_RANGE, EXIT_IO = 0, 2, 3, 4, 5
TRACE_DIR_ENV = "MEMGRID_TRACE_DIR"


@dataclass
class RunReport:
    command: str
    parameters: dict
    wall_time: float = 0.0
    outputs: dict = field(default_factory=dict)
    traces: list = field(default_factory=list)


def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {text!r} ({exc.msg})") from None


def _matrix(text: str, m: int, n: int, what: str) -> np.ndarray:
    a = np.asarray(_json_arg(text), dtype=float)
    if a.shape != (m, n):
        raise ValueError(f"{what} has shape {a.shape}, expected {(m, n)}")
    return a


def _vector(text: str, size: int, what: str) -> np.ndarray:
    v = np.asarray(_json_arg(text), dtype=float).reshape(-1)
    if v.size != size:
        raise ValueError(f"{what} has length {v.size}, expected {size}")
    return v


def _trace_path(args, default_name: str) -> Optional[Path]:
    if getattr(args, "trace", None):
        return Path(args.trace)
    env = os.environ.get(TRACE_DIR_ENV)
    if env:
        Path(env).mkdir(parents=True, exist_ok=True)
        return Path(env) / default_name
    return None


def _emit(obj) -> None:
    print(json.dumps(obj))


def cmd_new(args, report: RunReport) -> int:
    model = devices.parse_model(args.model)
    m, n = args.m, args.n
    if args.w is not None and args.phi is not None:
        raise ValueError("give either --w or --phi, not both")
    phi = np.zeros(m * n)
    if args.w is not None:
        w = _matrix(args.w, m, n, "--w")
        for l in range(n):
            for k in range(m):
                try:
                    phi[k + m * l] = devices.flux_from_memductance(model, w[k, l])
                except RangeError as exc:
                    # an unrealizable initial value is a validation failure here, not a write target
                    print(f"error: RangeError: cell ({k + 1}, {l + 1}): {exc}", file=sys.stderr)
                    return EXIT_VALIDATION
    elif args.phi is not None:
        raw = np.asarray(_json_arg(args.phi), dtype=float)
        phi = raw.reshape(-1, order="F") if raw.ndim == 2 else raw.reshape(-1)
        if phi.size != m * n:
            raise ValueError(f"--phi has {phi.size} entries, expected {m * n}")
    state = CrossbarState.uniform(m, n, model, phi)
    arrayfile.save_array(state, args.out)
    report.outputs["path"] = str(args.out)
    return EXIT_OK


def cmd_read(args, report: RunReport) -> int:
    state = arrayfile.load_array(args.array)
    schedule = protocols.make_read_schedule(state.n, args.tau, args.amplitude)
    w_hat, after = protocols.read_array(state, schedule)
    drift = float(np.max(np.abs(after.phi - state.phi)))
    print(f"flux restoration: max |phi(T) - phi(0)| = {drift:.3e}", file=sys.stderr)
    if drift > 1e-12:
        print("warning: flux not restored to 1e-12", file=sys.stderr)
    path = _trace_path(args, f"read-{Path(args.array).stem}.csv")
    if path is not None:
        signal = protocols.read_signal(schedule, state.m)
        times = sorted(set(signal.breakpoints) | set(schedule.times) | {schedule.horizon})
        _, rows = simulate(state, signal, times, record_flux=args.flux)
        arrayfile.write_signal_trace(path, rows, state.m, state.n, args.flux)
        report.traces.append(str(path))
    report.outputs.update(w_hat=w_hat.tolist(), flux_drift=drift)
    _emit(w_hat.tolist())
    return EXIT_OK


def cmd_write(args, report: RunReport) -> int:
    state = arrayfile.load_array(args.array)
    target = _matrix(args.target, state.m, state.n, "--target")
    cfg = protocols.WriteConfig(args.alpha, args.T, args.eps, args.probe, args.max_iters)
    after, traces = protocols.write_array(state, target, cfg, args.mode)
    arrayfile.save_array(after, args.array)
    cells = [
        {"cell": [k + 1, l + 1], "iterations": tr.iterations, "t_hat": tr.t_hat,
         "w_final": tr.w_inferred[-1]}
        for (k, l), tr in sorted(traces.items())
    ]
    error = float(np.max(np.abs(after.memductances() - target)))
    for c in cells:
        print(f"cell {tuple(c['cell'])}: {c['iterations']} iterations, T_hat={c['t_hat']:.6g}", file=sys.stderr)
    path = _trace_path(args, f"write-{Path(args.array).stem}.csv")
    if path is not None:
        arrayfile.write_write_traces(path, [traces[key] for key in sorted(traces)])
        report.traces.append(str(path))
    out = {"cells": cells, "max_error": error, "epsilon": args.eps}
    report.outputs.update(out)
    _emit(out)
    # inferred and true memductance agree only to rounding
    return EXIT_OK if error <= args.eps * (1 + 1e-9) else EXIT_GAIN


def cmd_matvec(args, report: RunReport) -> int:
    state = arrayfile.load_array(args.array)
    b = _vector(args.b, state.n, "--b")
    c = applications.matvec(state, b, args.tau, args.s)
    report.outputs["c"] = c.tolist()
    _emit(c.tolist())
    return EXIT_OK


def cmd_lstsq(args, report: RunReport) -> int:
    state = arrayfile.load_array(args.array)
    c = _vector(args.c, state.n, "--c")
    y = applications.least_squares(state, c)
    report.outputs["y"] = y.tolist()
    _emit(y.tolist())
    return EXIT_OK


def cmd_verify(args, report: RunReport) -> int:
    if args.array:
        state = arrayfile.load_array(args.array)
        models = list(dict.fromkeys(mdl for row in state.models for mdl in row))
    else:
        models = [devices.parse_model(args.model)]
    results = []
    for model in models:
        lo, hi = model.domain
        lo, hi = max(lo, args.lo), min(hi, args.hi)
        grid = np.linspace(lo, hi, args.points)
        rep = devices.verify_assumptions(model, grid)
        results.append({"model": model.to_dict(), **rep.to_dict()})
    report.outputs["reports"] = results
    _emit(results)
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_VALIDATION


def cmd_reach(args, report: RunReport) -> int:
    state = arrayfile.load_array(args.array)
    if (args.phi is None) == (args.w is None):
        raise ValueError("give exactly one of --phi or --w")
    if args.phi is not None:
        raw = np.asarray(_json_arg(args.phi), dtype=float)
        target = raw.reshape(-1, order="F") if raw.ndim == 2 else raw.reshape(-1)
    else:
        w = _matrix(args.w, state.m, state.n, "--w")
        target = np.array([
            devices.flux_from_memductance(state.model(k, l), w[k, l])
            for l in range(state.n) for k in range(state.m)
        ])
    ok = protocols.reachable_without_switches(state, target)
    report.outputs["reachable"] = ok
    _emit({"reachable": ok})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memgrid", description="Memristive crossbar array simulator")
    parser.add_argument("--report", help="write a JSON run report to this path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("new", help="create an array file")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--model", default="sigmoid:1,3,1", help="sigmoid:w_min,w_max,c or affine:a0,a1,lo,hi")
    p.add_argument("--w", help="initial memductance matrix (JSON)")
    p.add_argument("--phi", help="initial flux, column-major list or matrix (JSON)")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_new)

    p = sub.add_parser("read", help="read all memductances")
    p.add_argument("array")
    p.add_argument("--tau", type=float, default=0.25)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--trace", help="CSV trace output")
    p.add_argument("--flux", action="store_true", help="include flux columns in the trace")
    p.set_defaults(func=cmd_read)

    p = sub.add_parser("write", help="program a target memductance matrix")
    p.add_argument("array")
    p.add_argument("--target", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--probe", type=float, default=1.0)
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--mode", choices=["sequential", "diagonal"], default="sequential")
    p.add_argument("--trace", help="CSV trace output")
    p.set_defaults(func=cmd_write)

    p = sub.add_parser("matvec", help="analog matrix-vector product")
    p.add_argument("array")
    p.add_argument("--b", required=True)
    p.add_argument("--tau", type=float, default=0.25)
    p.add_argument("--s", type=float, default=None)
    p.set_defaults(func=cmd_matvec)

    p = sub.add_parser("lstsq", help="least-squares row potentials for injected column currents")
    p.add_argument("array")
    p.add_argument("--c", required=True)
    p.set_defaults(func=cmd_lstsq)

    p = sub.add_parser("verify", help="audit device model assumptions on a flux grid")
    p.add_argument("array", nargs="?")
    p.add_argument("--model", default="sigmoid:1,3,1")
    p.add_argument("--lo", type=float, default=-10.0)
    p.add_argument("--hi", type=float, default=10.0)
    p.add_argument("--points", type=int, default=1001)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reach", help="check switchless reachability of a target flux")
    p.add_argument("array")
    p.add_argument("--phi")
    p.add_argument("--w")
    p.set_defaults(func=cmd_reach)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in ("func", "report")}
    report = RunReport(args.command, params)
    start = time.perf_counter()
    try:
        code = args.func(args, report)
    except GainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_GAIN
    except IterationLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_GAIN
    except RangeError as exc:
        print(f"error: RangeError: {exc}", file=sys.stderr)
        code = EXIT_RANGE
    except (MemgridError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_IO
    report.wall_time = time.perf_counter() - start
    report.outputs.setdefault("exit_code", code)
    if args.report:
        try:
            arrayfile.atomic_write_text(args.report, arrayfile.dumps(asdict(report)))
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
