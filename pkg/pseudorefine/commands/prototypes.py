"""
Prototypes Command Module

Accumulates per-class feature sums over the manifest's labeled source
images and writes the normalized prototype bank.
"""

import logging
from argparse import Namespace
from typing import Any

from ..align.prototypes import (
    PrototypeAccumulator,
    accumulate_prototypes,
    downsample_labels,
    finalize_prototypes,
)
from ..core.runner import BatchRunner
from ..models.config import PipelineConfig
from ..models.manifest import ManifestRecord
from ..storage.documents import load_manifest
from ..storage.images import read_label_map
from ..utils.logging import get_logger, log_event
from .common import add_common_arguments, finish, output_dir, read_features

logger = get_logger(__name__)


def register_prototypes_parser(subparsers: Any) -> None:
    """Register prototypes subcommand parser."""
    parser = subparsers.add_parser(
        "prototypes",
        help="Build class prototypes from source features",
        description="Average labeled source features per class and l2-normalize them",
    )
    add_common_arguments(parser)
    parser.add_argument("--num-classes", type=int, help="Number of semantic classes")
    parser.add_argument(
        "--allow-absent",
        action="store_true",
        help="Succeed even when some classes have no labeled pixel",
    )
    parser.add_argument(
        "--strict-order",
        dest="strict_order",
        action="store_true",
        default=True,
        help="Merge per-image sums in manifest order (default)",
    )
    parser.add_argument(
        "--no-strict-order",
        dest="strict_order",
        action="store_false",
        help="Merge per-image sums as workers finish",
    )


class PrototypesCommand:
    """Prototypes command handler."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = output_dir(config)

    def execute(self, args: Namespace) -> int:
        manifest = load_manifest(args.manifest)
        report = BatchRunner(self.config.workers, "prototypes").run(manifest, self._process)
        if not report.results:
            return finish(report, "prototypes")
        if report.failed:
            logger.error("Prototype bank not written: %d records failed", len(report.failed))
            return finish(report, "prototypes")

        partials = report.payloads(strict_order=getattr(args, "strict_order", True))
        total = partials[0]
        for partial in partials[1:]:
            total = total.merge(partial)

        bank = finalize_prototypes(total)
        bank.save(
            self.out / "prototypes.npy",
            self.out / "prototypes.json",
            self.config.temperature,
            self.config.normalize_projected,
        )

        absent = bank.absent_classes()
        log_event(
            logger, logging.INFO, "prototypes written",
            classes=bank.num_classes, channels=bank.channels, absent=absent,
        )
        exit_code = finish(
            report, "prototypes",
            f"prototypes: {bank.num_classes} classes x {bank.channels} channels, absent {absent}",
        )
        if absent and not getattr(args, "allow_absent", False):
            logger.error("Classes %s have no labeled pixels (use --allow-absent)", absent)
            return 1
        return exit_code

    def _process(self, record: ManifestRecord) -> PrototypeAccumulator:
        inputs = record.require("features", "labels")
        features = read_features(inputs["features"])
        labels = read_label_map(inputs["labels"], self.config.num_classes)
        labels = downsample_labels(labels, features.shape[:2])

        acc = PrototypeAccumulator.empty(self.config.num_classes, features.shape[2])
        acc = accumulate_prototypes(acc, features, labels)
        logger.debug("%s: %d labeled feature pixels", record.record_id, int(acc.counts.sum()))
        return acc
