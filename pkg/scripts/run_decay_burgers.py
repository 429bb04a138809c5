#!/usr/bin/env python3
"""Burgers with sine data: L1 distance to the mean over time.

Thin wrapper over the CLI; equivalent to
    apcl decay --config configs/burgers_decay.json --plot
"""

import argparse
import os
import sys

from apcl import cli

HERE = os.path.dirname(os.path.abspath(__file__))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config",
                    default=os.path.join(HERE, "..", "configs", "burgers_decay.json"))
    ap.add_argument("--out", default="out")
    ap.add_argument("--no-plot", action="store_true")
    args = ap.parse_args()
    argv = ["decay", "--config", args.config, "--out", args.out]
    if not args.no_plot:
        argv.append("--plot")
    return cli.main(argv)


if __name__ == "__main__":
    sys.exit(main())
