"""
CLI Module - Command Line Interface

Handles command line parsing and routing to the pipeline stages.
"""

import argparse
import sys
from typing import List, Optional

from .. import __version__
from ..core.init import PseudoRefineApp
from ..utils.logging import LOG_FORMATS, LOG_LEVELS, get_logger
from ..validation.input_validation import ValidationError

logger = get_logger(__name__)


def create_parser() -> argparse.ArgumentParser:
    """Create the main argument parser with all subcommands."""
    parser = argparse.ArgumentParser(
        prog="pseudorefine",
        description="Mask-level pseudo-label refinement and prototype alignment toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  pseudorefine prompts --manifest data/manifest.json
  pseudorefine filter --manifest data/manifest.json --workers 8
  pseudorefine refine --manifest data/manifest.json --tau 0.968 --tau-prime 0.99
  pseudorefine prototypes --manifest data/source.json --allow-absent
  pseudorefine eval --manifest data/val.json --subset 16

For more help on a specific command, use:
  pseudorefine <command> --help
        """,
    )

    parser.add_argument("--version", action="version", version=f"PseudoRefine {__version__}")

    parser.add_argument(
        "--config", type=str, help="Configuration file path (default: .pseudorefine.yml)"
    )

    parser.add_argument(
        "--log-level",
        choices=list(LOG_LEVELS),
        default=None,
        help="Set logging level (default: info)",
    )

    parser.add_argument(
        "--log-format",
        choices=list(LOG_FORMATS),
        default=None,
        help="Log line format (default: json)",
    )

    # Create subparsers
    subparsers = parser.add_subparsers(
        dest="command", help="Available commands", metavar="<command>"
    )

    # Import and register subcommand parsers
    from ..commands.ema import register_ema_parser
    from ..commands.eval import register_eval_parser
    from ..commands.filter import register_filter_parser
    from ..commands.prompts import register_prompts_parser
    from ..commands.proto_loss import register_proto_loss_parser
    from ..commands.prototypes import register_prototypes_parser
    from ..commands.refine import register_refine_parser
    from ..commands.stats import register_stats_parser

    register_prompts_parser(subparsers)
    register_filter_parser(subparsers)
    register_refine_parser(subparsers)
    register_prototypes_parser(subparsers)
    register_proto_loss_parser(subparsers)
    register_ema_parser(subparsers)
    register_eval_parser(subparsers)
    register_stats_parser(subparsers)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the PseudoRefine CLI."""
    if argv is None:
        argv = sys.argv[1:]

    args = None
    debug = False
    try:
        parser = create_parser()
        args = parser.parse_args(argv)

        # Show help if no command specified
        if not args.command:
            parser.print_help()
            return 0

        app = PseudoRefineApp(args)
        debug = app.config is not None and app.config.log_level == "debug"
        return app.execute_command(args)

    except KeyboardInterrupt:
        logger.info("Operation cancelled by user")
        return 130
    except (ValidationError, ValueError, RuntimeError, OSError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        if debug or (args is not None and getattr(args, "log_level", None) == "debug"):
            import traceback

            traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
