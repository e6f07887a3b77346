"""
Configuration Model

Defines the pipeline configuration shared by every subcommand.
Each numeric field is validated against the range its stage accepts.
"""

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..align.loss import AlignConfig
from ..labels.refine import RefineParams
from ..metrics.iou import class_subset_preset
from ..superpixel.seeds import SeedsParams
from ..utils.logging import LOG_FORMATS, LOG_LEVELS
from ..validation.input_validation import (
    ConfigError,
    validate_class_ids,
    validate_unit_interval,
)

PROMPT_MODES = ("seeds", "grid")


@dataclass
class PipelineConfig:
    """Pseudo-label refinement and alignment configuration model."""

    # Pixel / mask selection thresholds
    tau: float = 0.968
    tau_prime: float = 0.99
    use_margin: bool = True

    # Prototype alignment
    temperature: float = 0.1
    lambda_proto: float = 0.1
    normalize_projected: bool = True
    exclude_absent: bool = False

    # Teacher update
    alpha: float = 0.99

    # Point prompts
    prompt_mode: str = "seeds"
    superpixel: SeedsParams = field(default_factory=SeedsParams)
    snap_to_region: bool = False
    points_per_side: int = 32

    # Classes
    num_classes: int = 19
    class_subset: Optional[Union[str, List[int]]] = None

    # Execution
    workers: int = 1
    output_dir: Path = field(default_factory=lambda: Path("out"))
    log_level: str = "info"
    log_format: str = "json"

    def __post_init__(self):
        """Post-initialization validation."""
        if self.log_level not in LOG_LEVELS:
            raise ConfigError(f"Invalid log level: {self.log_level}")
        if self.log_format not in LOG_FORMATS:
            raise ConfigError(f"Invalid log format: {self.log_format}")
        if self.prompt_mode not in PROMPT_MODES:
            raise ConfigError(
                f"prompt_mode must be one of {list(PROMPT_MODES)}, got {self.prompt_mode}"
            )
        if self.points_per_side < 1:
            raise ConfigError(f"points_per_side must be >= 1, got {self.points_per_side}")

        validate_unit_interval(self.tau, "tau")
        validate_unit_interval(self.tau_prime, "tau_prime", allow_one=True)
        validate_unit_interval(self.alpha, "alpha", allow_zero=True, allow_one=True)
        if not self.temperature > 0:
            raise ConfigError(f"temperature must be > 0, got {self.temperature}")
        if not self.lambda_proto >= 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lambda_proto}")

        if not 1 <= self.num_classes <= 255:
            raise ConfigError(f"num_classes must be in 1..255, got {self.num_classes}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

        if isinstance(self.superpixel, dict):
            self.superpixel = SeedsParams(**self.superpixel)
        if isinstance(self.output_dir, str):
            self.output_dir = Path(self.output_dir)
        self.class_ids()

    def class_ids(self) -> List[int]:
        """The evaluated class subset as explicit ids (all classes by default)."""
        if self.class_subset is None:
            ids = list(range(self.num_classes))
        elif isinstance(self.class_subset, (str, int)):
            ids = class_subset_preset(str(self.class_subset))
        else:
            ids = list(self.class_subset)
        if not ids:
            raise ConfigError("class_subset must not be empty")
        return validate_class_ids(ids, self.num_classes, "class_subset")

    def seeds_params(self) -> SeedsParams:
        return self.superpixel

    def refine_params(self) -> RefineParams:
        return RefineParams(self.tau, self.tau_prime, self.use_margin)

    def align_config(self) -> AlignConfig:
        return AlignConfig(
            self.temperature, self.lambda_proto, self.normalize_projected, self.exclude_absent
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        result = {}
        for key, value in self.__dict__.items():
            if isinstance(value, Path):
                result[key] = str(value)
            elif isinstance(value, SeedsParams):
                result[key] = asdict(value)
            else:
                result[key] = value
        return result
