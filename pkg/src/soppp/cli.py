"""Command line entry point: ``soppp simulate | verify-bound | graph-info``."""
from __future__ import annotations

import argparse
import sys

from .errors import SopppError
from .harness import graph_info, parse_config, run_experiment, verify_bound, write_csv

EXIT_OK, EXIT_INVALID, EXIT_BOUND = 0, 1, 2


def _load(path):
    with open(path) as fh:
        return parse_config(fh.read())


def cmd_simulate(args):
    cfg = _load(args.config)
    series = run_experiment(cfg)
    out = args.out or cfg.out
    if out:
        write_csv(series, out)
    else:
        write_csv(series, "/dev/stdout")
    print(
        f"terminal mean regret {series.mean_regret:.6g} (se {series.regret_se:.3g}) "
        f"over {cfg.reps} reps, eta={series.params.eta:.4g} beta={series.params.beta:.4g}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_verify(args):
    report = verify_bound(_load(args.config))
    print("\n".join(report.lines()))
    return EXIT_OK if report.passed else EXIT_BOUND


def cmd_graph_info(args):
    info = graph_info(args.game, args.k, args.n, args.kappa, args.condition, args.seed)
    for key, value in info.items():
        if isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, float):
            value = f"{value:.6g}"
        print(f"{key}: {value}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="soppp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run an experiment and write the regret series as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV path (default: config's out=, else stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify-bound", help="check mean regret against the regret bound")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("graph-info", help="print structural counts for a game graph")
    p.add_argument("--game", choices=("cb", "hs"), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kappa", type=int)
    p.add_argument("--condition", choices=("c1", "c2"), default="c1")
    p.add_argument("--seed", type=int, default=0, help="seed for the sampled round")
    p.set_defaults(func=cmd_graph_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except (SopppError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
