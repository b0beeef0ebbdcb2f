"""Command-line front end: fit, synth, experiment, verify, bounds.

Exit codes: 0 success, 1 failed verification, 2 malformed input files or
config, 3 infeasible flags.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bounds import BoundInputs, first_order_bound, linear_bound, second_order_bound
from .experiment import load_config, plot_data, records_to_csv, run_experiment
from .hypotheses import HypothesisError, load_class, load_dataset, save_dataset
from .solver import GridError, GridSpec, ResourceCapError, build_grid, fit_betting, fit_log, fit_squared
from .synthetic import ConfigError, SynthConfig, make_instance, sample_dataset
from .verify import SUITES, run_suites

EXIT_FAIL, EXIT_INPUT, EXIT_FLAGS = 1, 2, 3


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_fit(args) -> int:
    if args.eps is not None and (args.grid != "exact" or not args.eps > 0):
        raise _Exit(EXIT_FLAGS, "--eps requires --grid exact and a positive value")
    try:
        F = load_class(args.class_file)
        data = load_dataset(args.data, support=F.support)
    except (OSError, HypothesisError) as exc:
        raise _Exit(EXIT_INPUT, str(exc))
    if args.estimator == "squared":
        report = fit_squared(F, data)
    elif args.estimator == "log":
        report = fit_log(F, data)
    else:
        try:
            spec = GridSpec(mode=args.grid, exact_eps=args.eps)
            build_grid(spec, data.n)
        except GridError as exc:
            raise _Exit(EXIT_FLAGS, str(exc))
        report = fit_betting(F, data, spec)
    _emit(_dumps(report.to_json()), args.out)
    return 0


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _Exit(EXIT_INPUT, f"cannot read {path}: {exc}")


def cmd_synth(args) -> int:
    try:
        config = SynthConfig.from_json(_read_json(args.config))
        inst = make_instance(config, args.seed)
    except ConfigError as exc:
        raise _Exit(EXIT_INPUT, str(exc))
    _emit(_dumps(inst.to_json()), args.out)
    if args.data_out:
        if args.n is None or args.n < 1:
            raise _Exit(EXIT_FLAGS, "--data-out needs --n >= 1")
        seed = inst.seed if args.data_seed is None else args.data_seed
        save_dataset(sample_dataset(inst, args.n, seed), args.data_out)
    return 0


def cmd_experiment(args) -> int:
    try:
        config = load_config(args.config)
    except (OSError, ConfigError) as exc:
        raise _Exit(EXIT_INPUT, str(exc))
    try:
        records, summary = run_experiment(config)
    except (ConfigError, GridError, ResourceCapError, HypothesisError) as exc:
        raise _Exit(EXIT_INPUT, str(exc))
    _emit(records_to_csv(records), args.out)
    if args.summary:
        Path(args.summary).write_text(_dumps(summary), encoding="utf-8")
    if args.plot_data:
        Path(args.plot_data).write_text(plot_data(summary), encoding="utf-8")
    return 0


def cmd_verify(args) -> int:
    names = args.suite or list(SUITES)
    report = run_suites(names, seed=args.seed, quick=args.quick)
    _emit(_dumps(report), args.out)
    return 0 if report["passed"] else EXIT_FAIL


def cmd_bounds(args) -> int:
    try:
        inputs = BoundInputs(args.n, args.class_size, args.delta, args.dimension)
        out = {"n": args.n, "class_size": args.class_size, "delta": args.delta, "phi_bar": inputs.phi_bar}
        if args.q is not None:
            out["first_order"] = first_order_bound(args.q, inputs)
        if args.sigma2 is not None:
            out["second_order"] = second_order_bound(args.sigma2, inputs, args.delta_L)
            if args.dimension is not None:
                out["linear"] = linear_bound(args.sigma2, args.n, args.dimension, args.delta)
    except ValueError as exc:
        raise _Exit(EXIT_FLAGS, str(exc))
    _emit(_dumps(out), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="betreg", description="Variance-adaptive [0,1] regression toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit one estimator to a class file and dataset CSV")
    f.add_argument("--class", dest="class_file", required=True)
    f.add_argument("--data", required=True)
    f.add_argument("--estimator", choices=["squared", "log", "betting"], default="betting")
    f.add_argument("--grid", choices=["exact", "geometric"], default="geometric")
    f.add_argument("--eps", type=float, default=None, help="exact-grid step (default 1/(4n))")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("synth", help="emit a synthetic instance (and optionally a sample)")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out")
    s.add_argument("--n", type=int)
    s.add_argument("--data-out")
    s.add_argument("--data-seed", type=int)
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("experiment", help="run a replication sweep, CSV of records")
    e.add_argument("--config", required=True)
    e.add_argument("--out")
    e.add_argument("--summary")
    e.add_argument("--plot-data")
    e.set_defaults(func=cmd_experiment)

    v = sub.add_parser("verify", help="run property suites")
    v.add_argument("--suite", action="append", choices=SUITES)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--quick", action="store_true", help="reduced sizes")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bounds", help="evaluate bound right-hand sides")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--class-size", type=int, default=1)
    b.add_argument("--delta", type=float, required=True)
    b.add_argument("--q", type=float)
    b.add_argument("--sigma2", type=float)
    b.add_argument("--delta-L", dest="delta_L", type=float, default=0.0)
    b.add_argument("--dimension", type=int)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Exit as exc:
        print(f"betreg {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
