"""
Refine Command Module

Filters each image's masks, then lifts the teacher's pixel-level
pseudo-labels to whole masks where confident pixels agree.
"""

import logging
from argparse import Namespace
from typing import Any

from ..core.runner import BatchRunner, Skipped, is_up_to_date
from ..labels.refine import refine, refine_summary
from ..masks.filtering import build_mask_id_map, overlap_filter
from ..models.config import PipelineConfig
from ..models.manifest import ManifestRecord
from ..storage.documents import load_manifest, load_mask_set, read_json, write_csv, write_json
from ..storage.images import write_gray8, write_label_map
from ..utils.logging import get_logger, log_event
from ..validation.input_validation import validate_same_shape
from .common import add_common_arguments, finish, output_dir, read_probmap

logger = get_logger(__name__)

GAINS_HEADER = ("image", "before", "after", "gain")


def register_refine_parser(subparsers: Any) -> None:
    """Register refine subcommand parser."""
    parser = subparsers.add_parser(
        "refine",
        help="Refine pseudo-labels with mask-level assignment",
        description="Threshold the teacher softmax and assign unanimous masks a class",
    )
    add_common_arguments(parser)
    parser.add_argument("--tau", type=float, help="Pixel confidence threshold")
    parser.add_argument("--tau-prime", type=float, help="Softmax margin threshold")
    parser.add_argument(
        "--no-margin",
        dest="use_margin",
        action="store_false",
        default=None,
        help="Select mask voters by confidence alone",
    )


class RefineCommand:
    """Refine command handler."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = output_dir(config)
        self.params = config.refine_params()
        self.force = False

    def execute(self, args: Namespace) -> int:
        manifest = load_manifest(args.manifest)
        self.force = bool(getattr(args, "force", False))

        report = BatchRunner(self.config.workers, "refine").run(manifest, self._process)
        stats = [r.payload for r in report.succeeded]

        headline = None
        if stats:
            write_csv(
                ([s["image"], s["before"], s["after"], s["gain"]] for s in stats),
                GAINS_HEADER,
                self.out / "refine_gains.csv",
            )
            before = sum(s["before"] for s in stats)
            after = sum(s["after"] for s in stats)
            headline = f"labeled pixels: {before} -> {after} (+{after - before})"
        return finish(report, "refine", headline)

    def _process(self, record: ManifestRecord) -> Any:
        inputs = record.require("probmap", "masks")
        labels_path = self.out / "refined" / f"{record.record_id}.png"
        provenance_path = self.out / "provenance" / f"{record.record_id}.png"
        stats_path = self.out / "refine_stats" / f"{record.record_id}.json"
        outputs = [labels_path, provenance_path, stats_path]

        if not self.force and is_up_to_date(outputs, inputs.values()):
            return Skipped(read_json(stats_path))

        probmap = read_probmap(inputs["probmap"])
        candidates = load_mask_set(inputs["masks"])
        validate_same_shape(probmap.shape, (candidates.height, candidates.width),
                            f"{record.record_id}: probmap vs masks")

        idmap = build_mask_id_map(overlap_filter(candidates), probmap.height, probmap.width)
        result = refine(probmap, idmap, self.params)

        write_label_map(result.labels, labels_path)
        write_gray8(result.provenance, provenance_path)
        summary = refine_summary(result)
        summary["image"] = record.record_id
        write_json(summary, stats_path)

        log_event(
            logger, logging.INFO, "labels refined",
            image=record.record_id, before=summary["before"], after=summary["after"],
            assigned_masks=summary["assigned_masks"], mask_count=summary["mask_count"],
        )
        return summary
