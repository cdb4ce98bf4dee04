"""``cdflow`` command-line interface.

Every subcommand prints a JSON report (sorted keys) on stdout or writes it to
``--json PATH``; series go to ``--csv PATH``. Reports embed the resolved
configuration, the package version, the grid and the seed, so a run can be
replayed exactly. Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .cd_certifier import certify, frontier
from .constants import CONSTANTS, evaluate
from .entropy_flow import Entropy, FlowConfig, decay_certificate, refined_decay_certificate, run_flow, summary
from .errors import NumericalFailure, ValidationError
from .inequality_lab import predicted_gap, randomized_falsifier, spectral_gap
from .operator import OperatorSpec, discretize
from .testfunctions import random_positive
from .weights import build_measure, weight_from_config


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _clean(obj):
    """JSON-safe copy: numpy scalars to float, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(report: dict, args) -> None:
    text = json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w") as fh:
            fh.write(buf.getvalue())


def _family(args):
    if args.coeffs:
        return {"poly": [float(c) for c in args.coeffs.split(",")]}
    return args.family


def _operator(args) -> OperatorSpec:
    w = weight_from_config(_family(args))
    m = build_measure(w, args.beta, tail_tol=args.tail_tol, n=args.N, R=args.R, grid=args.grid)
    return OperatorSpec(w, float(args.beta), m)


def _base(args, op: OperatorSpec | None = None) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "json")}
    out = {"command": args.command, "version": __version__, "config": config, "seed": getattr(args, "seed", None)}
    if op is not None:
        out["grid"] = op.describe()
    return out


def _cmd_certify(args):
    op = _operator(args)
    cert = certify(op, args.rho, args.n, method=args.method)
    report = _base(args, op)
    report.update(cert.to_dict())
    _emit(report, args)


def _cmd_frontier(args):
    op = _operator(args)
    res = frontier(op, rho_max=args.rho_max, n_range=(args.n_min, args.n_max), method=args.method)
    report = _base(args, op)
    report.update(res.to_dict())
    report["poincare_constant"] = res.poincare_constant
    _emit(report, args)


def _parse_sweep(text: str):
    try:
        name, rng = text.split("=")
        lo, hi, step = (float(v) for v in rng.split(":"))
    except ValueError:
        raise ValidationError(f"--sweep expects name=start:stop:step, got {text!r}") from None
    if step == 0 or (hi - lo) / step < 0:
        raise ValidationError("--sweep step must move from start towards stop")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return name, [lo + i * step for i in range(count)]


def _cmd_constants(args):
    inputs = {k: getattr(args, k) for k in ("n", "beta", "p", "rho", "d")}
    if args.sweep:
        var, values = _parse_sweep(args.sweep)
        if var not in inputs:
            raise ValidationError(f"cannot sweep {var!r}; choose from {sorted(inputs)}")
        rows = []
        for v in values:
            rep = evaluate(args.name, **{**inputs, var: v})
            rows.append((v, "" if rep.value is None else rep.value, rep.validity))
        _write_csv(args.csv, (var, args.name, "valid"), rows)
        return
    rep = evaluate(args.name, **inputs)
    report = _base(args)
    report.update(rep.to_dict())
    _emit(report, args)


def _initial(args, x):
    if args.init == "x":
        f = x.copy()
    elif args.init == "bump":
        f = np.exp(-0.5 * x * x)
    else:
        f = random_positive(x, np.random.default_rng(args.seed))
    return f + args.shift


def _cmd_flow(args):
    op = _operator(args)
    K = args.K if args.K is not None else predicted_gap(op)
    ent = Entropy(args.entropy, args.p if args.p is not None else 2.0)
    cfg = FlowConfig(
        op,
        _initial(args, op.x),
        entropy=ent,
        t_end=args.t_end,
        dt=args.dt,
        record_every=args.record_every,
        scheme=args.scheme,
    )
    trace = run_flow(cfg, K, args.theta)
    if args.csv:
        _write_csv(args.csv, trace.CSV_HEADER, trace.rows())
    report = _base(args, op)
    report["K"] = K
    report.update(summary(trace))
    report["decay_ok"] = decay_certificate(trace, K)
    report["refined_ok"] = refined_decay_certificate(trace, K, args.theta)
    _emit(report, args)


def _cmd_gap(args):
    op = _operator(args)
    rep = spectral_gap(discretize(op))
    report = _base(args, op)
    report.update(rep.to_dict())
    _emit(report, args)


def _cmd_beckner(args):
    op = _operator(args)
    C = args.C if args.C is not None else 1.0 / predicted_gap(op)
    rep = randomized_falsifier(
        op, args.p, C, trials=args.trials, seed=args.seed, weighted=not args.unweighted, theta=args.theta, source=args.source
    )
    if args.csv:
        _write_csv(args.csv, ("trial", "quotient"), enumerate(rep.quotients.tolist()))
    report = _base(args, op)
    report.update(rep.to_dict())
    _emit(report, args)


def _grid_options(p):
    p.add_argument("--family", default="quadratic", choices=("quadratic", "quartic"))
    p.add_argument("--coeffs", help="even polynomial weight: comma-separated coefficients of 1, x^2, x^4, ...")
    p.add_argument("--beta", type=float, default=3.0)
    p.add_argument("--R", type=float, default=None, help="truncation radius (default: from --tail-tol)")
    p.add_argument("--N", type=int, default=8001, help="number of grid nodes (odd)")
    p.add_argument("--grid", default="auto", choices=("auto", "uniform", "sinh"))
    p.add_argument("--tail-tol", type=float, default=1e-10)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cdflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cdflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--json", help="write the JSON report here instead of stdout")
        return p

    p = command("certify", _cmd_certify, "check CD(rho, n) pointwise")
    _grid_options(p)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--method", choices=("closed-form", "grid-scan"))

    p = command("frontier", _cmd_frontier, "best rho n/(n-1) over certified pairs")
    _grid_options(p)
    p.add_argument("--rho-max", type=float, default=math.inf)
    p.add_argument("--n-min", type=float, default=-1e3)
    p.add_argument("--n-max", type=float, default=1e3)
    p.add_argument("--method", choices=("closed-form", "grid-scan"))

    p = command("constants", _cmd_constants, "evaluate closed-form constants")
    p.add_argument("--name", required=True, choices=sorted(CONSTANTS))
    for flag in ("n", "beta", "p", "rho", "d"):
        p.add_argument(f"--{flag}", type=float)
    p.add_argument("--sweep", help="name=start:stop:step, writes CSV")
    p.add_argument("--csv", help="CSV path for --sweep (default stdout)")

    p = command("flow", _cmd_flow, "simulate the entropy flow")
    _grid_options(p)
    p.add_argument("--entropy", default="variance", choices=("variance", "power", "xlogx"))
    p.add_argument("--p", type=float)
    p.add_argument("--init", default="x", choices=("x", "bump", "random"))
    p.add_argument("--shift", type=float, default=0.0, help="constant added to the initial datum")
    p.add_argument("--t-end", type=float, default=2.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--record-every", type=int, default=10)
    p.add_argument("--scheme", default="trbdf2", choices=("trbdf2", "theta"))
    p.add_argument("--K", type=float, help="decay rate under test (default: predicted gap)")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="trace CSV path")

    p = command("gap", _cmd_gap, "spectral gap of the discretized operator")
    _grid_options(p)

    p = command("beckner", _cmd_beckner, "randomized falsification of B_p(C)")
    _grid_options(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--C", type=float, help="constant under test (default: 1/predicted gap)")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unweighted", action="store_true")
    p.add_argument("--source", default="cd", choices=("cd", "weighted"))
    p.add_argument("--csv", help="per-trial quotients CSV path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except ValidationError as err:
        sys.stderr.write(f"cdflow {args.command}: invalid input: {err}\n")
        return 2
    except NumericalFailure as err:
        sys.stderr.write(f"cdflow {args.command}: numerical failure: {err}\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
