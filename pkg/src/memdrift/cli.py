"""Command-line entry point: one subcommand per experiment.

    memdrift <experiment> [--config PATH] [--out DIR] [--nodes N] [--steps M]

Flags override config file values; missing settings use the standard
oxide-device defaults.
"""

import argparse
import sys

from .config import EXPERIMENTS, ExperimentConfig, parse_config
from .errors import ConfigError
from .experiments import run_experiment


def build_parser():
    parser = argparse.ArgumentParser(
        prog="memdrift",
        description="Scaled 1D drift-diffusion simulator for oxide memristors")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="config file (sections [device], "
                       "[grid], [time], [bias], [output])")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--nodes", type=int, help="grid nodes N (overrides config)")
        p.add_argument("--steps", type=int, help="time steps M (overrides config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else ExperimentConfig()
        cfg.experiment = args.experiment
        if args.out is not None:
            cfg.output.dir = args.out
            cfg.explicit.add("output.dir")
        if args.nodes is not None:
            cfg.grid.N = args.nodes
            cfg.explicit.add("grid.N")
        if args.steps is not None:
            cfg.time.M = args.steps
            cfg.explicit.add("time.M")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    status, written = run_experiment(cfg)
    for path in written:
        print(path)
    return status


if __name__ == "__main__":
    sys.exit(main())
