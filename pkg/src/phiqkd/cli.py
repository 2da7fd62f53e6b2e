"""Command-line entry point: ``phiqkd <command> [options]``.

Commands
    povm         POVM matrices, outcome probabilities and accuracy/efficiency
    sweep        per-tilt probabilities and key rates at fixed overlap angle
    optimize     optimal tilt for one key-rate mode
    simulate     Monte Carlo protocol run
    histogram    Neumark-dilation readout histogram
    compare-b92  overlap-angle sweep against B92 (coverage, difference, improvement)

Exit codes: 0 success, 1 no positive key under ``--require-positive``,
2 invalid arguments.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys

import numpy as np

from . import gsd, keyrate, optimizer, simulator
from .keyrate import FiniteKeyParams

SCHEMA_VERSION = "1"
SWEEP_COLUMNS = [
    "phi", "p_s", "p_e", "p_q", "eta", "qber", "delta", "q_worst",
    "r_asymptotic", "r_finite", "key_length", "r_secure", "positive",
]
THETA_COLUMNS = [
    "theta", "phi_opt", "r_phiqkd", "r_b92", "difference", "improvement", "phi_bound", "coverage",
]


class UsageError(Exception):
    pass


# -- formatting -------------------------------------------------------------


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".9g")


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if hasattr(obj, "value"):  # enums
        return obj.value
    return obj


def to_json(kind: str, payload) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, "data": _jsonable(payload)}
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- argument handling ------------------------------------------------------


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment, keys use flag names."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _angle(args, value: float) -> float:
    return math.radians(value) if args.degrees else value


def finite_params(args) -> FiniteKeyParams:
    try:
        return FiniteKeyParams(
            N=int(args.N), n=int(args.n), eps_pe=args.eps_pe,
            eps_sec=args.eps_sec, eps_cor=args.eps_cor, f=args.f,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def parse_phi_grid(text: str, top: float, to_rad) -> np.ndarray:
    """``start:stop:num`` or a comma-separated list; ``med`` stands for the domain end."""

    def val(tok):
        tok = tok.strip()
        return top if tok.lower() == "med" else to_rad(float(tok))

    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, num = val(parts[0]), val(parts[1]), int(parts[2])
            if num < 1:
                raise ValueError
            grid = np.linspace(start, stop, num)
        else:
            grid = np.array([val(t) for t in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"malformed phi grid {text!r}") from exc
    if grid.size == 0 or np.any(grid < -1e-12) or np.any(grid > top + 1e-12):
        raise UsageError(f"phi grid must lie within [0, {top:.9g}]")
    return np.clip(grid, 0.0, top)


def _signal_pair(args) -> gsd.SignalPair:
    try:
        return gsd.make_signal_pair(_angle(args, args.theta))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _phi(args, sp) -> float:
    try:
        return gsd.check_phi(sp, _angle(args, args.phi))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# -- commands ---------------------------------------------------------------


def cmd_povm(args) -> int:
    sp = _signal_pair(args)
    phi = _phi(args, sp)
    povm = gsd.build_povm(sp, phi)
    closed = gsd.probs_closed(sp, phi)
    operator = gsd.probs_operator(sp, povm)
    met = gsd.metrics(closed)
    data = {
        "theta": sp.theta, "phi": phi, "phi_med": sp.phi_med,
        "pi1": povm.pi1.real, "pi2": povm.pi2.real, "pi0": povm.pi0.real,
        "probs_closed": closed, "probs_operator": operator,
        "chi": met.chi, "zeta": met.zeta,
        "completeness_residual": povm.completeness_residual(),
    }
    if args.format == "json":
        emit(args, to_json("povm", data))
        return 0
    lines = [f"theta = {fmt(sp.theta)}  phi = {fmt(phi)}  phi_med = {fmt(sp.phi_med)}"]
    for name in ("pi1", "pi2", "pi0"):
        m = data[name]
        lines.append(f"{name} = [[{fmt(m[0][0])}, {fmt(m[0][1])}], [{fmt(m[1][0])}, {fmt(m[1][1])}]]")
    for label, p in (("closed", closed), ("operator", operator)):
        lines.append(f"{label:>8}: P_s={p.p_s:.6f} P_e={p.p_e:.6f} P_q={p.p_q:.6f}")
    lines.append(f"chi={met.chi:.2f} zeta={met.zeta:.2f}")
    lines.append(f"completeness residual = {data['completeness_residual']:.3e}")
    emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_sweep(args) -> int:
    sp = _signal_pair(args)
    fk = finite_params(args)
    to_rad = (lambda x: _angle(args, x))
    grid = parse_phi_grid(args.phi_grid, sp.phi_med, to_rad) if args.phi_grid else (
        np.linspace(0.0, sp.phi_med, args.points)
    )
    rows = []
    for phi in grid:
        r = keyrate.key_rate_report(sp, float(phi), fk)
        rows.append({
            "phi": r.phi, "p_s": r.probs.p_s, "p_e": r.probs.p_e, "p_q": r.probs.p_q,
            "eta": r.eta, "qber": r.qber, "delta": r.delta, "q_worst": r.q_worst,
            "r_asymptotic": r.r_asymptotic, "r_finite": r.r_finite,
            "key_length": r.key_length, "r_secure": r.r_secure,
            "positive": r.positive["composable"],
        })
    if args.format == "json":
        emit(args, to_json("phi_sweep", {"theta": sp.theta, "b92_secure_rate": keyrate.b92_secure_rate(sp, fk), "rows": rows}))
    else:
        emit(args, to_csv(SWEEP_COLUMNS, rows))
    return 0


def cmd_optimize(args) -> int:
    sp = _signal_pair(args)
    fk = finite_params(args)
    res = optimizer.optimize_phi(sp, args.mode, fk)
    if args.format == "json":
        emit(args, to_json("optimum", res))
    else:
        emit(args, (
            f"mode={res.mode.value} theta={fmt(res.theta)} phi_opt={fmt(res.phi_opt)} "
            f"rate={fmt(res.rate)} eta={fmt(res.report.eta)} qber={fmt(res.report.qber)}\n"
        ))
    if args.require_positive and not res.report.positive[res.mode.value]:
        return 1
    return 0


def cmd_simulate(args) -> int:
    sp = _signal_pair(args)
    cfg = simulator.SimulationConfig(sp.theta, _phi(args, sp), finite_params(args), args.seed)
    summary = simulator.run_protocol(cfg, workers=args.workers)
    if args.format == "json":
        emit(args, to_json("simulation", {"config": cfg, "summary": summary}))
    else:
        c = summary.counts
        q_hat = "n/a" if summary.q_hat is None else fmt(summary.q_hat)
        emit(args, (
            f"correct={c[0]} incorrect={c[1]} inconclusive={c[2]} sifted={summary.n_sifted}\n"
            f"q_hat={q_hat} delta={fmt(summary.delta)} "
            f"key_length={summary.key_length_hat} r_secure={fmt(summary.r_secure_hat)}\n"
            + (f"{summary.message}\n" if summary.message else "")
        ))
    if args.require_positive and summary.key_length_hat <= 0:
        return 1
    return 0


def cmd_histogram(args) -> int:
    sp = _signal_pair(args)
    shots = 10**8 if args.long else args.shots
    cfg = simulator.SimulationConfig(sp.theta, _phi(args, sp), seed=args.seed, shots=shots)
    counts = simulator.dilation_histogram(cfg, workers=args.workers)
    if args.format == "json":
        emit(args, to_json("histogram", {"theta": sp.theta, "phi": cfg.phi, "shots": shots, "counts": counts}))
    else:
        rows = [{"label": k, "count": v, "frequency": v / shots} for k, v in counts.items()]
        emit(args, to_csv(["label", "count", "frequency"], rows))
    return 0


def cmd_compare_b92(args) -> int:
    fk = finite_params(args)
    lo = _angle(args, args.theta_min)
    hi = _angle(args, args.theta_max) if args.theta_max is not None else math.pi / 2
    if not 0.0 < lo <= hi <= math.pi / 2 + 1e-12 or args.points < 1:
        raise UsageError("theta grid must lie within (0, pi/2]")
    grid = np.linspace(lo, min(hi, math.pi / 2), args.points)
    rows = optimizer.theta_sweep(grid, fk, workers=args.workers)
    marks = optimizer.landmarks(rows)
    if args.format == "json":
        emit(args, to_json("theta_sweep", {"rows": rows, "landmarks": marks}))
    else:
        emit(args, to_csv(THETA_COLUMNS, [dataclasses.asdict(r) for r in rows]))
        for k, v in dataclasses.asdict(marks).items():
            print(f"# {k} = {fmt(v)}", file=sys.stderr)
    return 0


# -- parser -----------------------------------------------------------------


def _default_seed() -> int:
    env = os.environ.get("PHIQKD_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--theta", type=float, default=math.pi / 4)
    common.add_argument("--degrees", action="store_true", help="angles are given in degrees")
    common.add_argument("--N", type=int, default=10**6, help="signals sent")
    common.add_argument("--n", type=int, default=10**5, help="test bits for parameter estimation")
    common.add_argument("--eps-pe", type=float, default=1e-10)
    common.add_argument("--eps-sec", type=float, default=1e-10)
    common.add_argument("--eps-cor", type=float, default=1e-10)
    common.add_argument("--f", type=float, default=1.15, help="error-correction efficiency")
    common.add_argument("--seed", type=int, default=_default_seed())
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--output", "-o", default=None)
    common.add_argument("--require-positive", action="store_true")

    parser = argparse.ArgumentParser(prog="phiqkd", description="Tilted-POVM B92 analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("povm", parents=[common], help="POVM elements and probabilities")
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_povm)

    p = sub.add_parser("sweep", parents=[common], help="probabilities and rates over a phi grid")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--phi-grid", default=None, help="start:stop:num or comma list ('med' allowed)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", parents=[common], help="optimal tilt angle")
    p.add_argument("--mode", choices=[m.value for m in optimizer.Mode], default="composable")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo protocol run")
    p.add_argument("--phi", type=float, default=0.073953)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("histogram", parents=[common], help="dilation readout histogram")
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--shots", type=int, default=10**6)
    p.add_argument("--long", action="store_true", help="use 10^8 shots")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("compare-b92", parents=[common], help="theta sweep against B92")
    p.add_argument("--points", type=int, default=600)
    p.add_argument("--theta-min", type=float, default=0.01)
    p.add_argument("--theta-max", type=float, default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_compare_b92)
    return parser


def _apply_config(parser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        values = read_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    # re-parse with file values as defaults so explicit flags still win
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        action = known.get(key)
        if action is None:
            raise UsageError(f"unknown config key {key!r}")
        if action.const is True and action.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            try:
                defaults[key] = action.type(raw) if action.type else raw
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {raw!r}") from exc
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except UsageError as exc:
        print(f"phiqkd: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
