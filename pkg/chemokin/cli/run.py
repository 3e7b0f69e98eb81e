#!/usr/bin/env python3
"""
CLI for running chemokin experiments.

Usage:
    # Closure profiles for the gradients in a config
    python -m chemokin.cli.run closure --config experiments/closure_sweep.json

    # Monte Carlo ensemble with an explicit seed and four threads
    python -m chemokin.cli.run agents --config experiments/agents.json --seed 7 --threads 4

    # Velocity curves, failing the process if any acceptance check fails
    python -m chemokin.cli.run velocity-sweep --config experiments/velocity_sweep.json --strict

    # Run whatever tier the config names
    python -m chemokin.cli.run run --config experiments/macro.json

    # Commands that finish in seconds
    python -m chemokin.cli.run list --fast
"""

import argparse
import json
import logging
import sys

from pydantic import ValidationError

from chemokin.config import configure_logging, get_settings
from chemokin.errors import ChemokinError
from chemokin.models import RunReport
from chemokin.services.base import TierRegistry
from chemokin.services.harness import TIER_COMMANDS, load_config, register_builtin_tiers

logger = logging.getLogger(__name__)

EXIT_FAILURE = 1
EXIT_INVALID_CONFIG = 2
EXIT_CHECKS_FAILED = 3


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Experiment JSON file (defaults apply when omitted)")
    parser.add_argument("--out", help="Output directory (default: CHEMOKIN_OUTPUT_DIR or ./results)")
    parser.add_argument("--seed", type=int, help="Master seed (unsigned 64-bit)")
    parser.add_argument("--threads", type=int, help="Worker threads (default: CHEMOKIN_THREADS or 1)")
    parser.add_argument(
        "--strict",
        action="store_true",
        help="Exit with status 3 when any acceptance check fails",
    )


def build_parser(registry: TierRegistry) -> argparse.ArgumentParser:
    """Parser with one subcommand per registered tier plus ``run`` and ``list``."""
    parser = argparse.ArgumentParser(
        description="Multiscale chemotaxis experiments",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    for command in registry.get_all():
        help_text = f"{command.description} (slow)" if command.slow else command.description
        sub = subparsers.add_parser(command.name, help=help_text)
        _add_common_flags(sub)

    run = subparsers.add_parser("run", help="Run the tier named in the config")
    _add_common_flags(run)

    listing = subparsers.add_parser("list", help="List the registered commands")
    listing.add_argument("--fast", action="store_true", help="Only commands that finish in seconds")
    return parser


def list_commands(registry: TierRegistry, fast_only: bool = False) -> None:
    """Print one line per registered command, slow ones tagged."""
    commands = registry.get_fast() if fast_only else registry.get_all()
    for command in commands:
        tag = "  [slow]" if command.slow else ""
        print(f"{command.name:<16}{command.description}{tag}")


def print_report(report: RunReport) -> None:
    """Print the report summary as JSON on stdout."""
    payload = {
        "tier": report.tier,
        "config_hash": report.config_hash,
        "passed": report.passed,
        "failed_checks": report.failed_checks,
        "files": [str(f) for f in report.files],
    }
    print(json.dumps(payload, indent=2))


def main(argv: list[str] | None = None) -> int:
    """Main CLI entrypoint; returns the process exit status."""
    registry = register_builtin_tiers()
    parser = build_parser(registry)
    args = parser.parse_args(argv)

    settings = get_settings()
    configure_logging(settings.model_copy(update={"log_level": "DEBUG"}) if args.verbose else settings)

    if not args.command:
        parser.print_help()
        return EXIT_FAILURE

    if args.command == "list":
        list_commands(registry, args.fast)
        return 0

    if args.seed is not None and not 0 <= args.seed < 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be at least 1")

    try:
        config = load_config(
            args.config,
            {"seed": args.seed, "threads": args.threads, "out": args.out},
        )
    except ValidationError as e:
        logger.error("Invalid config %s:\n%s", args.config, e)
        return EXIT_INVALID_CONFIG
    except OSError as e:
        logger.error("Cannot read config %s: %s", args.config, e)
        return EXIT_INVALID_CONFIG

    name = TIER_COMMANDS[config.tier] if args.command == "run" else args.command
    command = registry.get(name)
    if command is None:
        logger.error("Unknown command: %s", name)
        return EXIT_FAILURE

    try:
        report = command.run(config)
    except ChemokinError as e:
        logger.error("%s failed: %s", name, e)
        return EXIT_FAILURE

    print_report(report)
    if (args.strict or settings.strict) and not report.passed:
        logger.error("Acceptance checks failed: %s", ", ".join(report.failed_checks))
        return EXIT_CHECKS_FAILED
    return 0


if __name__ == "__main__":
    sys.exit(main())
