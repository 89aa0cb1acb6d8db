# Comments in English only
"""Command line entry point: ``python tdalab.py <experiment> --config FILE`` or ``tdalab expected``."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from closed_forms import EXPECTED_QUANTITIES, expected_table
from config.experiment_config import load_experiment_config, parse_levels
from config.settings import DEFAULT_ALPHA, DEFAULT_LEVELS, DEFAULT_SIDE, EXPERIMENT_KEYS
from experiment_registry import get_experiment_entry
from field_sim import CovarianceModel, GridSpec
from reports.table_export import to_markdown
from validation.errors import TdaError

logger = logging.getLogger("tdalab")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def _add_experiment_parser(subparsers: argparse._SubParsersAction, key: str) -> None:
    p = subparsers.add_parser(key, help=f"run the {key} experiment")
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--smoke", action="store_true", help="reduced, fast acceptance profile")
    p.add_argument("--n-jobs", type=int, default=None)
    p.add_argument("--log-level", default="INFO")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdalab",
        description="Persistent homology, Euler calculus and Gaussian closed forms checked by Monte Carlo.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for key in EXPERIMENT_KEYS:
        _add_experiment_parser(subparsers, key)

    e = subparsers.add_parser("expected", help="print closed-form values as CSV")
    e.add_argument("--quantity", required=True, choices=EXPECTED_QUANTITIES)
    e.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    e.add_argument("--dim", type=int, default=2)
    e.add_argument("--side", type=float, default=DEFAULT_SIDE)
    e.add_argument("--topology", default="box", choices=("box", "torus"))
    e.add_argument("--levels", type=parse_levels, default=DEFAULT_LEVELS, help="'-3:3:0.5' or '-1,0,1'")
    e.add_argument("--transform", default="identity")
    e.add_argument("--n", type=int, default=5, help="number of cubes for coverage")
    e.add_argument("--tau", type=float, default=0.3)
    e.add_argument("--coverage-dim", type=int, default=2)
    e.add_argument("--log-level", default="WARNING")
    return parser


def _run_expected(args: argparse.Namespace) -> int:
    # the grid size does not enter any closed form
    spec = GridSpec.cube(size=3, dim=args.dim, side=args.side, topology=args.topology)
    table = expected_table(
        args.quantity,
        spec,
        CovarianceModel(alpha=args.alpha),
        args.levels,
        transform=args.transform,
        n_balls=args.n,
        tau=args.tau,
        coverage_dim=args.coverage_dim,
    )
    sys.stdout.write(table.to_csv(index=False, float_format="%.12g"))
    return EXIT_OK


def _run_experiment(args: argparse.Namespace) -> int:
    overrides = {
        "experiment": args.command,
        "runs": args.runs,
        "seed": args.seed,
        "output_dir": args.out,
        "n_jobs": args.n_jobs,
        "smoke": True if args.smoke else None,
    }
    cfg = load_experiment_config(args.config, overrides)
    entry = get_experiment_entry(cfg.experiment)
    logger.info("running %s (%s)", entry.key, entry.label)

    report = entry.run(cfg)

    sys.stdout.write(to_markdown(report.summary) + "\n\n")
    for check in report.checks:
        status = "PASS" if check.passed else ("FAIL" if check.enforced else "warn")
        sys.stdout.write(f"[{status}] {check.name}  {check.detail}\n")
    sys.stdout.write(f"\nartifacts in {cfg.output_dir}\n")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(list(argv) if argv is not None else None)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "expected":
            return _run_expected(args)
        return _run_experiment(args)
    except (TdaError, KeyError) as exc:
        logger.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
