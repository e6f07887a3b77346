"""
Shared Command Helpers

Flags common to every manifest-driven subcommand, input loaders used by
more than one stage, and the end-of-run summary.
"""

import logging
from argparse import ArgumentParser
from pathlib import Path
from typing import Optional

import numpy as np

from ..core.runner import RunReport
from ..models.arrays import ProbMap
from ..models.config import PipelineConfig
from ..storage.tensor_io import load_tensor
from ..utils.logging import get_logger, log_event
from ..validation.input_validation import DimensionError, validate_probmap

logger = get_logger(__name__)


def add_common_arguments(parser: ArgumentParser, manifest_required: bool = True) -> None:
    """Register --manifest, --out, --workers and --force."""
    parser.add_argument(
        "--manifest", required=manifest_required, help="JSON manifest of per-image records"
    )
    parser.add_argument("--out", help="Output directory (default: out)")
    parser.add_argument("--workers", type=int, help="Number of parallel workers")
    parser.add_argument(
        "--force", action="store_true", help="Recompute outputs that are already current"
    )


def output_dir(config: PipelineConfig) -> Path:
    return Path(config.output_dir)


def read_probmap(path: Path) -> ProbMap:
    """Load an H x W x C softmax tensor and check every pixel is a distribution."""
    probs = load_tensor(path)
    validate_probmap(probs)
    return ProbMap(probs)


def read_features(path: Path) -> np.ndarray:
    features = load_tensor(path)
    if features.ndim != 3:
        raise DimensionError(f"{path}: features must be H' x W' x C, got {features.shape}")
    return features


def finish(report: RunReport, stage: str, headline: Optional[str] = None) -> int:
    """Log the run summary, print it for humans and return the exit code."""
    summary = report.summary()
    log_event(logger, logging.INFO, "run summary", stage=stage, **summary)

    print(
        f"{stage}: {summary['succeeded']}/{summary['records']} records ok"
        f" ({summary['skipped']} skipped, {summary['failed']} failed)"
    )
    for record_id, error in summary["errors"].items():
        print(f"  {record_id}: {error}")
    if headline:
        print(headline)
    return report.exit_code
