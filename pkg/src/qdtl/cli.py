"""Command line entry point: ``qdtl {gen,learn,boost,qgl,bench,report}``.

Exit codes: 0 on success, 1 for an invalid configuration, 2 when the
observed contract-violation rate exceeds delta plus three binomial sigma.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .boolean import wht
from .emulation import QueryLedger
from .gl import StronglyBiasedOracle, qgl
from .harness import (
    ConfigError,
    ExperimentConfig,
    contract_violated,
    load_config,
    make_problem,
    query_slope,
    records_csv,
    read_records,
    report,
    run_experiment,
    substream,
    sweep,
)
from .io import (
    channel_to_csv,
    function_from_csv,
    function_to_csv,
    ledger_to_csv,
    spectrum_to_csv,
    tree_to_sexpr,
)

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 1, 2


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key = value file; its entries override flags")
    for f in dataclasses.fields(ExperimentConfig):
        if f.name == "task":
            continue
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=None, metavar=f.name.upper(),
                            help=f"default: {f.default}")


def _config(args: argparse.Namespace, task: str) -> ExperimentConfig:
    flags = {f.name: getattr(args, f.name) for f in dataclasses.fields(ExperimentConfig)
             if f.name != "task" and getattr(args, f.name, None) is not None}
    flags["task"] = task
    text = args.config.read_text() if args.config is not None else ""
    return load_config(text, flags)


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _run(args: argparse.Namespace, task: str) -> int:
    config = _config(args, task)
    records = run_experiment(config)
    _emit(records_csv(records), args.out)
    table, _ = report(records)
    sys.stderr.write(table)
    return EXIT_VIOLATION if contract_violated(records, config.delta) else EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    config = _config(args, "learn")
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    for trial in range(config.trials):
        problem = make_problem(config, substream(config.seed, trial, "problem"))
        stem = out / f"problem_{trial:03d}"
        Path(f"{stem}.tree").write_text(tree_to_sexpr(problem.tree) + "\n")
        Path(f"{stem}.function.csv").write_text(function_to_csv(problem.target))
        Path(f"{stem}.spectrum.csv").write_text(spectrum_to_csv(wht(problem.target)))
        Path(f"{stem}.channel.csv").write_text(channel_to_csv(problem.channel))
    (out / "config.txt").write_text(config.to_text())
    return EXIT_OK


def cmd_learn(args: argparse.Namespace) -> int:
    return _run(args, "learn")


def cmd_boost(args: argparse.Namespace) -> int:
    return _run(args, "boost")


def cmd_qgl(args: argparse.Namespace) -> int:
    config = _config(args, "learn")
    if not 0 < args.gap < args.tau <= 1:
        raise ConfigError("need 0 < gap < tau <= 1")
    if args.function is not None:
        h = function_from_csv(args.function.read_text())
    else:
        h = make_problem(config.replace(setting="realizable"),
                         substream(config.seed, 0, "problem")).target
    oracle = StronglyBiasedOracle(h, np.full(1 << h.n, args.bias))
    ledger = QueryLedger()
    trace: list = []
    outcome = qgl(oracle, args.tau, args.gap, config.delta,
                  substream(config.seed, 0, "estimation-noise"), ledger, trace=trace,
                  adversarial=config.adversarial_estimates)
    if args.trace:
        sys.stderr.write("level,live,marked,queries\n")
        sys.stderr.write("".join(level.line() + "\n" for level in trace))
    lines = ["l,S,queries", f"{outcome.l},{outcome.S},{outcome.queries}", ""]
    _emit("\n".join(lines) + ledger_to_csv(ledger), args.out)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    config = _config(args, args.task)
    eps_values = [float(v) for v in args.eps_grid.split(",")]
    records = sweep(config, eps_values, tie_kappa=not args.fixed_kappa)
    _emit(records_csv(records), args.out)
    table, _ = report(records)
    sys.stderr.write(table)
    if len(set(eps_values)) > 1:
        sys.stderr.write(f"query slope in 1/eps: {query_slope(records):.3f}\n")
    return EXIT_VIOLATION if contract_violated(records, config.delta) else EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    records = []
    for path in args.records:
        records += read_records(path.read_text())
    table, csv_text = report(records)
    sys.stdout.write(table)
    if args.out is not None:
        args.out.write_text(csv_text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdtl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write tree, truth table, spectrum and channel files")
    _add_config_flags(gen)
    gen.add_argument("--out-dir", type=Path, default=Path("problems"))
    gen.set_defaults(handler=cmd_gen)

    for name, handler, help_text in (("learn", cmd_learn, "weak-learner trials"),
                                     ("boost", cmd_boost, "boosting trials")):
        command = sub.add_parser(name, help=help_text)
        _add_config_flags(command)
        command.add_argument("--out", type=Path, help="records CSV (default stdout)")
        command.set_defaults(handler=handler)

    search = sub.add_parser("qgl", help="one prefix search on a clean or biased oracle")
    _add_config_flags(search)
    search.add_argument("--function", type=Path, help="truth table CSV (default: generated tree)")
    search.add_argument("--tau", type=float, default=0.2)
    search.add_argument("--gap", type=float, default=0.05, help="accuracy eps of the search")
    search.add_argument("--bias", type=float, default=0.0, help="uniform wrong-label mass")
    search.add_argument("--trace", action="store_true", help="per-level lines on stderr")
    search.add_argument("--out", type=Path)
    search.set_defaults(handler=cmd_qgl)

    bench = sub.add_parser("bench", help="eps sweep with a query-scaling fit")
    _add_config_flags(bench)
    bench.add_argument("--task", choices=("learn", "boost"), default="learn")
    bench.add_argument("--eps-grid", default="0.4,0.2,0.1")
    bench.add_argument("--fixed-kappa", action="store_true", help="do not tie kappa to eps")
    bench.add_argument("--out", type=Path)
    bench.set_defaults(handler=cmd_bench)

    rep = sub.add_parser("report", help="aggregate records CSV files")
    rep.add_argument("records", type=Path, nargs="+")
    rep.add_argument("--out", type=Path, help="summary CSV")
    rep.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, ValueError, OSError) as err:
        sys.stderr.write(f"qdtl {args.command}: {err}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
