"""Command line interface for daxt."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Callable, Dict, Optional, Sequence

from daxt.config import FLAT_KEYS, RunConfig, load_config
from daxt.errors import DaxtError, MissingArtifactError, ModelLoadError
from daxt.pipeline import (
    run_all,
    run_datasets,
    run_ingest,
    run_render,
    run_report,
    run_score,
    run_sweep,
    run_synth,
    run_train,
    run_validate,
    run_value,
    run_xt,
)

logger = logging.getLogger("daxt")

EXIT_OK = 0
EXIT_CONTRACT = 1
EXIT_IO = 2

COMMANDS: Dict[str, Callable[[RunConfig], Any]] = {
    "ingest": run_ingest,
    "synth": run_synth,
    "xt": run_xt,
    "datasets": run_datasets,
    "train": run_train,
    "value": run_value,
    "score": run_score,
    "validate": run_validate,
    "render": run_render,
    "sweep-a": run_sweep,
    "run-all": run_all,
    "report": run_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose, args.quiet)

    try:
        overrides = {key: getattr(args, key) for key in FLAT_KEYS}
        config = load_config(args.config, overrides=overrides)
        COMMANDS[args.command](config)
    except (MissingArtifactError, ModelLoadError, OSError) as error:
        logger.error("%s", error)
        return EXIT_IO
    except (DaxtError, ValueError) as error:
        logger.error("%s", error)
        return EXIT_CONTRACT
    return EXIT_OK


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="[%(name)s] %(levelname)s %(message)s", stream=sys.stderr, force=True)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="daxt", description="Value interceptions and tackles by the threat they prevent."
    )

    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="Configuration file (key = value, JSON or YAML).")
    parent.add_argument("--input", help="SPADL events CSV.")
    parent.add_argument("--synth-games", type=int, help="Games in the synthetic league when no input is given.")
    parent.add_argument("--seed", type=int, help="Seed for synthesis, data split and weight init.")
    parent.add_argument("--a", type=int, help="Actions per sequence.")
    parent.add_argument("--xt-tol", type=float, help="Value-iteration tolerance.")
    parent.add_argument("--xt-max-iter", type=int, help="Value-iteration iteration cap.")
    parent.add_argument("--epochs", type=int)
    parent.add_argument("--batch", type=int)
    parent.add_argument("--split", type=float, help="Validation fraction.")
    parent.add_argument("--rho", type=float, help="Adadelta decay.")
    parent.add_argument("--eps", type=float, help="Adadelta epsilon.")
    parent.add_argument("--min-interceptions", type=int, help="Minimum interceptions for the average ranking.")
    parent.add_argument("--min-tackles", type=int, help="Minimum tackles for the average ranking.")
    parent.add_argument("--min-appearances", type=int, help="Minimum games played to be scored.")
    parent.add_argument(
        "--per-position",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Normalize scores within position pools.",
    )
    parent.add_argument("--positions", help="CSV player_id,position.")
    parent.add_argument("--market-values", help="CSV player_id,player_name,market_value_millions.")
    parent.add_argument("--matches", help="CSV player_id,goals_conceded,appearances.")
    parent.add_argument("--weights", help="Score weights: 'default' or four comma-separated numbers.")
    parent.add_argument("--benchmark", help="Player id whose interception and tackle counts anchor the comparison tables.")
    parent.add_argument("--tolerance", type=int, help="Count window around the benchmark player (default 10).")
    parent.add_argument("--workers", type=int, help="Worker processes for chunked stages.")
    parent.add_argument("--out", help="Run directory.")
    verbosity = parent.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Log debug detail.")
    verbosity.add_argument("--quiet", action="store_true", help="Log warnings and errors only.")

    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[parent])
    return parser


if __name__ == "__main__":
    raise SystemExit(main())
