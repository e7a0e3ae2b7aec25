import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from misspec_bounds.config_loader import ConfigLoader
from misspec_bounds.errors import MisspecError, UsageError
from misspec_bounds.models.experiment_config import SCENARIOS
from misspec_bounds.scenario_runner import ScenarioRunner
from misspec_bounds.table_to_csv import emit_csv, emit_gnuplot_stub

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="misspec-bounds",
        allow_abbrev=False,
        description="Compute misspecified Cramer-Rao bounds and check them by Monte Carlo.",
        epilog="Any configuration key can be overridden as --key=value, e.g. --N=20 or --rho=[0,0.5].",
    )
    parser.add_argument("scenario", choices=SCENARIOS, help="Scenario to run.")
    parser.add_argument("--config", type=str, default=None, help="Flat YAML file overriding the shipped defaults.")
    parser.add_argument("--out", type=str, default=None, help="Output directory (default: output_dir from config).")
    parser.add_argument(
        "--log-level",
        type=str,
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Root logger level.",
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of misspec-bounds.

    Returns:
        int: 0 if every check passed, 1 if a check failed, 2 on a usage
        error, 3 if the results could not be written.
    """
    parser = build_parser()
    try:
        args, overrides = parser.parse_known_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    loader = ConfigLoader()
    try:
        loader.initiate()
        config = loader.run(args.scenario, args.config, overrides)
    except UsageError as e:
        logger.error("%s", e)
        return EXIT_USAGE

    runner = ScenarioRunner()
    runner.initiate()
    try:
        result = runner.run(config)
    except MisspecError as e:
        logger.error("Scenario %s aborted: %s", config.scenario, e)
        return EXIT_CHECK_FAILED

    out_dir = Path(args.out if args.out is not None else config.output_dir)
    try:
        for name, table in result.tables.items():
            path = emit_csv(table, out_dir / f"{name}.csv")
            if config.gnuplot:
                emit_gnuplot_stub(table, path)
    except OSError as e:
        logger.error("Cannot write results to %s: %s", out_dir, e)
        return EXIT_IO

    for failure in result.failures():
        print(f"FAILED {failure.name}: {failure.detail}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
