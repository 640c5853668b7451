"""CLI: regenerate figures from simulator CSV outputs.

    memdrift-plots limit <limit-study output dir> [--out DIR]
    memdrift-plots iv <iv.csv> [--out FILE]
"""

import argparse
import sys

from .csvdata import SchemaError
from .iv import plot_iv
from .limit import plot_limit_study_dir


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="memdrift-plots")
    sub = parser.add_subparsers(dest="command", required=True)
    p_limit = sub.add_parser("limit")
    p_limit.add_argument("directory")
    p_limit.add_argument("--out", default=None)
    p_iv = sub.add_parser("iv")
    p_iv.add_argument("csv")
    p_iv.add_argument("--out", default="iv.png")
    args = parser.parse_args(argv)
    try:
        if args.command == "limit":
            result = plot_limit_study_dir(args.directory, args.out)
            print(result.profiles_path)
            print(result.convergence_path)
        else:
            result = plot_iv(args.csv, args.out)
            print(result.path)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
