"""Command line front end: one subcommand per experiment kind.

Exit codes: 0 success, 2 bad config or arguments, 3 validation or CFL
refusal, 4 a configured threshold failed.
"""

from __future__ import annotations

import argparse
import sys

from .harness import KINDS, ConfigError, load_config, parse_config, run_experiment
from .solver import CflError, CounterexampleError

_HELP = {
    "check-flux": "decide nondegeneracy of a flux over a frequency group",
    "decay": "evolve almost periodic data and track distance to its mean",
    "contraction": "advance two data sets jointly and track their L1 distance",
    "counterexample": "validate and evolve an exact traveling wave",
    "convergence": "measure L1 error against an exact wave on refined grids",
    "spectrum": "probe Fourier coefficients of the evolved lift",
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="apcl",
        description="Finite volume experiments for almost periodic conservation laws.",
    )
    sub = ap.add_subparsers(dest="kind", required=True, metavar="KIND")
    for kind in KINDS:
        sp = sub.add_parser(kind, help=_HELP[kind])
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--out", default=".", help="output directory (default: .)")
        sp.add_argument("--plot", action="store_true", help="also write SVG plots")
        sp.add_argument("--threads", type=int, default=1,
                        help="worker threads for multi-grid runs")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(load_config(args.config), kind=args.kind)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        report = run_experiment(cfg, threads=max(1, args.threads))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (CflError, CounterexampleError, ValueError, AssertionError) as e:
        print(f"refused: {e}", file=sys.stderr)
        return 3
    paths = report.save(args.out, prefix=cfg.prefix, plot=args.plot)
    for name in sorted(report.verdicts):
        print(f"{'PASS' if report.verdicts[name] else 'FAIL'} {name}")
    for name in sorted(report.scalars):
        print(f"{name} = {report.scalars[name]}")
    for p in paths:
        print(f"wrote {p}")
    return 0 if report.passed else 4


if __name__ == "__main__":
    raise SystemExit(main())
