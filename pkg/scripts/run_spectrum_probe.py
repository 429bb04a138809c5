#!/usr/bin/env python3
"""Lifted (1, sqrt 2) Burgers run: probe coefficients outside the data's
integer image and compare orbit means against torus integrals.
"""

import argparse
import os
import sys

from apcl import cli

HERE = os.path.dirname(os.path.abspath(__file__))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config",
                    default=os.path.join(HERE, "..", "configs", "spectrum_probe.json"))
    ap.add_argument("--out", default="out")
    args = ap.parse_args()
    return cli.main(["spectrum", "--config", args.config, "--out", args.out,
                     "--plot"])


if __name__ == "__main__":
    sys.exit(main())
