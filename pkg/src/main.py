#!/usr/bin/env python3
"""
COFTRL lab - command-line entry point.

Usage:
    python -m src.main run configs/matching_pennies.json --horizon 4096
    python -m src.main verify all --samples 2000
    python -m src.main landscape configs/landscape.json --out results/landscape
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

# Ensure the src directory is in the path for imports
src_dir = Path(__file__).parent.parent
if str(src_dir) not in sys.path:
    sys.path.insert(0, str(src_dir))

from src.errors import ConfigError
from src.models.experiment import ExperimentItem, ExperimentKind
from src.services.config_parser import load_config
from src.services.learners import AVAILABLE_ALGORITHMS
from src.services.regularizers import AVAILABLE_KINDS
from src.services.experiment_runner import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_VERIFICATION_FAILED,
    VERIFICATION_FAILED_MESSAGE,
    ExperimentBatchRunner,
    run_experiment,
)
from src.services.verification import DEFAULT_SAMPLES, SUITES, run_verify

logger = logging.getLogger("src.main")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _add_override_flags(command: argparse.ArgumentParser) -> None:
    command.add_argument("--seed", type=int, default=None, help="Override the document seed")
    command.add_argument("--horizon", type=int, default=None, help="Override the document horizon T")


def _registry_epilog() -> str:
    lines = ["regularizer kinds:"]
    for info in AVAILABLE_KINDS.values():
        name = f"{info.name} ({info.hyperparameter})" if info.hyperparameter else info.name
        lines.append(f"  {name:<22} {info.description}")
    lines.append("algorithms:")
    for info in AVAILABLE_ALGORITHMS.values():
        lines.append(f"  {info.name:<22} {info.description}")
    return "\n".join(lines)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coftrl",
        description="Cautious optimistic FTRL: self-play experiments, landscapes and property checks.",
    )
    parser.add_argument("--log-level", choices=LOG_LEVELS, default="WARNING", help="Root logger level")
    parser.add_argument("-v", "--verbose", action="store_true", help="Shortcut for --log-level INFO")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser(
        "run",
        help="Run one or more experiment documents",
        epilog=_registry_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    run.add_argument("configs", nargs="+", type=Path, help="JSON experiment documents")
    _add_override_flags(run)
    run.add_argument("--out", type=Path, default=None,
                     help="Output directory (one subdirectory per document when several are given)")
    run.add_argument("--jobs", type=int, default=1, help="Worker processes for several documents")

    verify = commands.add_parser("verify", help="Run a numerical property suite")
    verify.add_argument("suite", choices=SUITES + ("all",))
    verify.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="Random draws per property")
    verify.add_argument("--seed", type=int, default=0)

    landscape = commands.add_parser("landscape", help="Sweep the learning-rate landscape at d = 2")
    landscape.add_argument("config", type=Path, help="JSON document of kind landscape")
    _add_override_flags(landscape)
    landscape.add_argument("--out", type=Path, default=None, help="Output directory")
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = "INFO" if args.verbose and args.log_level == "WARNING" else args.log_level
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _overrides(args: argparse.Namespace) -> dict:
    if args.horizon is not None and args.horizon < 1:
        raise ConfigError("horizon", f"must be at least 1, got {args.horizon}")
    return {"seed": args.seed, "horizon": args.horizon, "output_dir": args.out}


def _cmd_run(args: argparse.Namespace) -> int:
    items = [ExperimentItem.from_path(path) for path in args.configs]
    runner = ExperimentBatchRunner(
        items,
        jobs=args.jobs,
        overrides=_overrides(args),
        on_item_completed=lambda item: print(f"{item.name}: " + ", ".join(str(p) for p in item.outputs)),
    )
    runner.run()
    failed = runner.failed
    for item in failed:
        print(f"error: {item.name}: {item.error_message}", file=sys.stderr)
    if not failed:
        return EXIT_OK
    if all(item.error_message == VERIFICATION_FAILED_MESSAGE for item in failed):
        return EXIT_VERIFICATION_FAILED
    return EXIT_ERROR


def _cmd_verify(args: argparse.Namespace) -> int:
    report = run_verify(args.suite, samples=args.samples, seed=args.seed)
    print(report.format())
    return EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED


def _cmd_landscape(args: argparse.Namespace) -> int:
    config = load_config(args.config, **_overrides(args))
    if config.kind is not ExperimentKind.LANDSCAPE:
        raise ConfigError("kind", f"expected a landscape document, got {config.kind.value!r}")
    result = run_experiment(config)
    for path in result.outputs:
        print(path)
    return result.status


COMMANDS = {
    "run": _cmd_run,
    "verify": _cmd_verify,
    "landscape": _cmd_landscape,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the command line."""
    args = _build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, RuntimeError) as e:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
