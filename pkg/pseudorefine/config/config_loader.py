"""
Configuration Loader Module

Handles loading and validation of pipeline configuration from a YAML/JSON
file, the log-level environment variable and command-line overrides.
Later sources win: file, then environment, then flags.
"""

import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from ..models.config import PipelineConfig
from ..utils.logging import get_logger
from ..validation.input_validation import ConfigError, ValidationError, validate_file_path

logger = get_logger(__name__)

DEFAULT_CONFIG_FILE = ".pseudorefine.yml"
LOG_LEVEL_ENV = "PSEUDOREFINE_LOG_LEVEL"

# file keys that differ from the dataclass field names
KEY_ALIASES = {"lambda": "lambda_proto"}


class ConfigLoader:
    """Configuration loader with validation."""

    def __init__(self, config_file: Optional[str] = None):
        """Initialize configuration loader."""
        self.explicit = config_file is not None
        self.config_file = config_file or DEFAULT_CONFIG_FILE
        self.config_data: Dict[str, Any] = {}

    def load(self, overrides: Optional[Dict[str, Any]] = None) -> PipelineConfig:
        """Load configuration from file, environment and flag overrides."""
        logger.debug("Loading configuration")

        if self.explicit or Path(self.config_file).exists():
            self._load_config_file()

        self._load_env_config()

        for key, value in (overrides or {}).items():
            if value is not None:
                self._set(key, value)

        config = self._create_config()
        logger.debug("Configuration loaded successfully")
        return config

    def _load_config_file(self) -> None:
        """Load configuration from a YAML (or JSON) file."""
        logger.debug("Loading configuration from %s", self.config_file)
        path = validate_file_path(self.config_file, "config file")

        try:
            with open(path, "r", encoding="utf-8") as f:
                file_data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"Could not parse config file {path}: {e}") from e

        if file_data is None:
            return
        if not isinstance(file_data, dict):
            raise ConfigError(f"Config file {path} must hold a mapping")

        # Extract pseudorefine configuration
        if "pseudorefine" in file_data:
            file_data = file_data["pseudorefine"] or {}
        for key, value in file_data.items():
            self._set(key, value)

    def _load_env_config(self) -> None:
        """The log level is the only setting read from the environment."""
        value = os.getenv(LOG_LEVEL_ENV)
        if value:
            self.config_data["log_level"] = value.lower()

    def _set(self, key: str, value: Any) -> None:
        key = KEY_ALIASES.get(key, key)
        if key == "superpixel":
            if not isinstance(value, dict):
                raise ConfigError("'superpixel' must be a mapping of superpixel parameters")
            merged = dict(self.config_data.get("superpixel", {}))
            merged.update(value)
            self.config_data["superpixel"] = merged
        else:
            self.config_data[key] = value

    def _create_config(self) -> PipelineConfig:
        """Create PipelineConfig object from loaded data."""
        try:
            config = PipelineConfig(**self.config_data)
        except ConfigError:
            raise
        except (TypeError, ValueError, ValidationError) as e:
            raise ConfigError(f"Invalid configuration: {e}") from e

        if logger.isEnabledFor(10):  # DEBUG level
            logger.debug("Loaded configuration: %s", config.to_dict())
        return config

    def save_config(self, config: PipelineConfig, file_path: Optional[str] = None) -> None:
        """Save configuration to file."""
        output_file = Path(file_path or self.config_file)
        data = config.to_dict()
        data["lambda"] = data.pop("lambda_proto")

        try:
            output_file.parent.mkdir(parents=True, exist_ok=True)
            with open(output_file, "w", encoding="utf-8") as f:
                yaml.safe_dump({"pseudorefine": data}, f, default_flow_style=False, indent=2)
        except OSError as e:
            raise ConfigError(f"Could not save configuration: {e}") from e

        logger.info("Configuration saved to %s", output_file)


def create_default_config() -> str:
    """Create a default configuration file template."""
    default_config = """# PseudoRefine Configuration File
#
# Flags given on the command line override these values.

pseudorefine:
  # Pixel-level confidence threshold and mask-level softmax margin
  tau: 0.968
  tau_prime: 0.99
  use_margin: true

  # Prototype contrastive alignment
  temperature: 0.1
  lambda: 0.1
  normalize_projected: true
  exclude_absent: false

  # EMA teacher momentum
  alpha: 0.99

  # Point prompts: "seeds" (one per superpixel) or "grid" (regular baseline)
  prompt_mode: "seeds"
  superpixel:
    num_superpixels: 1000
    levels: 4
    bins_per_channel: 5
    iterations: 4
    smoothing_prior: 2
  snap_to_region: false
  points_per_side: 32

  # Classes; the mIoU subset defaults to every class.
  # Use "16" for the SYNTHIA subset or give a list of ids.
  num_classes: 19
  # class_subset: "16"

  # Execution
  workers: 1
  output_dir: "out"
  log_level: "info"  # debug, info, warning, error
  log_format: "json"  # json, text
"""
    return default_config
