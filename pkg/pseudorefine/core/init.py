"""
PseudoRefine Application Initialization

Handles logging setup, configuration loading and command routing.
"""

import os
from argparse import Namespace
from typing import Any, Dict, Optional

from .. import __version__
from ..config.config_loader import LOG_LEVEL_ENV, ConfigLoader
from ..models.config import PipelineConfig
from ..utils.logging import get_logger, setup_logging

logger = get_logger(__name__)

# argparse destination -> configuration field
OVERRIDE_KEYS = {
    "out": "output_dir",
    "workers": "workers",
    "log_level": "log_level",
    "log_format": "log_format",
    "tau": "tau",
    "tau_prime": "tau_prime",
    "use_margin": "use_margin",
    "prompt_mode": "prompt_mode",
    "snap_to_region": "snap_to_region",
    "points_per_side": "points_per_side",
    "temperature": "temperature",
    "lambda_proto": "lambda_proto",
    "normalize_projected": "normalize_projected",
    "exclude_absent": "exclude_absent",
    "alpha": "alpha",
    "num_classes": "num_classes",
}


def collect_overrides(args: Namespace) -> Dict[str, Any]:
    """Flag values that were actually given, keyed by configuration field."""
    overrides: Dict[str, Any] = {}
    for dest, key in OVERRIDE_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value
    num_superpixels = getattr(args, "num_superpixels", None)
    if num_superpixels is not None:
        overrides["superpixel"] = {"num_superpixels": num_superpixels}
    return overrides


class PseudoRefineApp:
    """Main application class."""

    def __init__(self, args: Namespace):
        """Initialize the application."""
        self.args = args
        self.config: Optional[PipelineConfig] = None

        # Setup logging first
        early_level = args.log_level or os.getenv(LOG_LEVEL_ENV, "info").lower()
        setup_logging(early_level, args.log_format or "json")
        logger.debug("Initializing PseudoRefine v%s", __version__)

        self._load_configuration()
        setup_logging(self.config.log_level, self.config.log_format)
        logger.debug("PseudoRefine initialization complete")

    def _load_configuration(self) -> None:
        """Load and validate configuration."""
        config_loader = ConfigLoader(self.args.config)
        self.config = config_loader.load(collect_overrides(self.args))

    def execute_command(self, args: Namespace) -> int:
        """Execute the specified command."""
        logger.debug("Executing command: %s", args.command)

        from ..commands.ema import EmaCommand
        from ..commands.eval import EvalCommand
        from ..commands.filter import FilterCommand
        from ..commands.prompts import PromptsCommand
        from ..commands.proto_loss import ProtoLossCommand
        from ..commands.prototypes import PrototypesCommand
        from ..commands.refine import RefineCommand
        from ..commands.stats import StatsCommand

        handlers = {
            "prompts": PromptsCommand,
            "filter": FilterCommand,
            "refine": RefineCommand,
            "prototypes": PrototypesCommand,
            "proto-loss": ProtoLossCommand,
            "ema": EmaCommand,
            "eval": EvalCommand,
            "stats": StatsCommand,
        }

        handler = handlers.get(args.command)
        if handler is None:
            logger.error("Unknown command: %s", args.command)
            return 1
        return handler(self.config).execute(args)
