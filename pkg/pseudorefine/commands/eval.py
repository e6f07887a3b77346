"""
Eval Command Module

Accumulates a confusion matrix over the manifest and reports per-class IoU
and mIoU.
"""

import logging
from argparse import Namespace
from pathlib import Path
from typing import Any, Optional

from ..core.runner import BatchRunner
from ..labels.refine import argmax_labels
from ..metrics.iou import (
    ConfusionMatrix,
    class_subset_preset,
    confusion,
    format_table_header,
    format_table_row,
    iou_report,
)
from ..models.config import PipelineConfig
from ..models.manifest import ManifestRecord
from ..storage.documents import load_manifest, write_json
from ..storage.images import read_label_map
from ..utils.logging import get_logger, log_event
from ..validation.input_validation import MissingInputError
from .common import add_common_arguments, finish, output_dir, read_probmap

logger = get_logger(__name__)


def register_eval_parser(subparsers: Any) -> None:
    """Register eval subcommand parser."""
    parser = subparsers.add_parser(
        "eval",
        help="Evaluate predictions with per-class IoU and mIoU",
        description="Compare predictions against the manifest's ground-truth labels",
    )
    add_common_arguments(parser)
    parser.add_argument(
        "--pred-dir", help="Directory of <id>.png predictions (default: probmap argmax)"
    )
    parser.add_argument("--subset", choices=["19", "16"], help="Class subset for the mean")
    parser.add_argument("--num-classes", type=int, help="Number of semantic classes")


class EvalCommand:
    """Eval command handler."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = output_dir(config)
        self.pred_dir: Optional[Path] = None

    def execute(self, args: Namespace) -> int:
        manifest = load_manifest(args.manifest)
        self.pred_dir = Path(args.pred_dir) if getattr(args, "pred_dir", None) else None
        subset = (
            class_subset_preset(args.subset)
            if getattr(args, "subset", None)
            else self.config.class_ids()
        )

        report = BatchRunner(self.config.workers, "eval").run(manifest, self._process)
        if not report.results or report.failed:
            return finish(report, "eval")

        total = ConfusionMatrix.zeros(self.config.num_classes)
        for partial in report.payloads():
            total = total + partial

        iou = iou_report(total, subset)
        result = iou.to_dict()
        result["images"] = len(report.succeeded)
        result["confusion"] = total.to_dict()
        write_json(result, self.out / "eval.json")

        log_event(
            logger, logging.INFO, "evaluation finished",
            miou=iou.miou, images=len(report.succeeded),
        )
        table = format_table_header(self.config.num_classes) + "\n" + format_table_row(iou)
        return finish(report, "eval", table)

    def _process(self, record: ManifestRecord) -> ConfusionMatrix:
        gt = read_label_map(record.require("labels")["labels"], self.config.num_classes)

        if self.pred_dir is not None:
            pred_path = self.pred_dir / f"{record.record_id}.png"
            if not pred_path.is_file():
                raise MissingInputError(
                    f"Record '{record.record_id}' has no prediction {pred_path}", [str(pred_path)]
                )
            pred = read_label_map(pred_path)
        else:
            pred = argmax_labels(read_probmap(record.require("probmap")["probmap"]))

        return confusion(pred, gt, self.config.num_classes)
