"""
EMA Command Module

Blends a student parameter tensor into the teacher's.
"""

from argparse import Namespace
from pathlib import Path
from typing import Any

from ..align.ema import ema_update
from ..models.config import PipelineConfig
from ..storage.tensor_io import load_tensor, save_tensor
from ..utils.logging import get_logger
from .common import output_dir

logger = get_logger(__name__)


def register_ema_parser(subparsers: Any) -> None:
    """Register ema subcommand parser."""
    parser = subparsers.add_parser(
        "ema",
        help="Update teacher parameters by exponential moving average",
        description="theta_T <- alpha * theta_T + (1 - alpha) * theta_S",
    )
    parser.add_argument("--teacher", required=True, help="Teacher parameter tensor")
    parser.add_argument("--student", required=True, help="Student parameter tensor")
    parser.add_argument("--alpha", type=float, help="Momentum (default: 0.99)")
    parser.add_argument("--output", help="Output tensor (default: <out>/ema.npy)")
    parser.add_argument("--out", help="Output directory (default: out)")


class EmaCommand:
    """EMA command handler."""

    def __init__(self, config: PipelineConfig):
        self.config = config

    def execute(self, args: Namespace) -> int:
        teacher = load_tensor(args.teacher)
        student = load_tensor(args.student)
        updated = ema_update(teacher, student, self.config.alpha)

        output = Path(args.output) if args.output else output_dir(self.config) / "ema.npy"
        save_tensor(updated, output)
        logger.info("EMA update with alpha=%s written to %s", self.config.alpha, output)
        print(f"ema: alpha={self.config.alpha} -> {output}")
        return 0
