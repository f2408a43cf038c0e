"""Command-line entry point: yule-bins run | list-experiments | self-test."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from yule_bins.experiment_layer.config_handler import ConfigError
from yule_bins.experiment_layer.experiment_handler import EXIT_USAGE, ExperimentHandler
from yule_bins.utils import configure_logging, resolve_threads

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="yule-bins",
        description="Verification experiments for balls thrown into Yule-split bins.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one experiment from a JSON config")
    run.add_argument("--config", help="flat JSON config file")
    run.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key; repeatable",
    )
    run.add_argument("--verbose", action="store_true", help="debug logging")

    commands.add_parser("list-experiments", help="print the experiment catalog")

    self_test = commands.add_parser("self-test", help="quick installation check")
    self_test.add_argument("--output-dir", default="yule-bins-self-test")
    self_test.add_argument(
        "--threads", default="1", help="worker threads, a positive integer or auto"
    )
    self_test.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse `argv` and dispatch; returns the process exit status."""
    args = build_parser().parse_args(argv)
    configure_logging(logging.DEBUG if getattr(args, "verbose", False) else logging.INFO)
    handler = ExperimentHandler()

    if args.command == "list-experiments":
        for line in handler.list_experiments():
            sys.stdout.write(line + "\n")
        return 0

    if args.command == "self-test":
        try:
            threads = resolve_threads(args.threads)
        except ValueError as exc:
            logger.error("%s", exc)
            return EXIT_USAGE
        return handler.self_test(args.output_dir, threads)

    if not args.config and not args.overrides:
        logger.error("run needs --config or at least one --set experiment_id=...")
        return EXIT_USAGE
    try:
        config = handler.load_config(args.config, args.overrides)
    except (ConfigError, FileNotFoundError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    return handler.run(config)


if __name__ == "__main__":
    sys.exit(main())
