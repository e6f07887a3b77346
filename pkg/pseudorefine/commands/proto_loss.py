"""
Proto-Loss Command Module

Projects each image's features, scores them against a saved prototype
bank and reports the contrastive loss (optionally its gradient and the
combined training objective).
"""

import logging
from argparse import Namespace
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from ..align.loss import (
    EmptyLabelsError,
    check_labels_present,
    proto_loss,
    proto_loss_grad,
    similarity,
    total_loss,
)
from ..align.projection import ProjectionHead, project
from ..align.prototypes import PrototypeBank, downsample_labels
from ..core.runner import BatchRunner
from ..models.config import PipelineConfig
from ..models.manifest import ManifestRecord
from ..storage.documents import load_manifest, write_json
from ..storage.images import read_label_map
from ..storage.tensor_io import save_tensor
from ..utils.logging import get_logger, log_event
from ..validation.input_validation import DimensionError
from .common import add_common_arguments, finish, output_dir, read_features

logger = get_logger(__name__)


def register_proto_loss_parser(subparsers: Any) -> None:
    """Register proto-loss subcommand parser."""
    parser = subparsers.add_parser(
        "proto-loss",
        help="Evaluate the prototype contrastive loss",
        description="Score projected features against a prototype bank",
    )
    add_common_arguments(parser)
    parser.add_argument("--bank", help="Prototype tensor (default: <out>/prototypes.npy)")
    parser.add_argument("--head-weight", help="Projection weight tensor, C_enc x C_proto")
    parser.add_argument("--head-bias", help="Projection bias tensor, C_proto")
    parser.add_argument("--grad-dir", help="Write dL/dz per image into this directory")
    parser.add_argument("--temperature", type=float, help="Softmax temperature")
    parser.add_argument("--lambda", dest="lambda_proto", type=float, help="Loss weight")
    parser.add_argument(
        "--no-normalize",
        dest="normalize_projected",
        action="store_false",
        default=None,
        help="Use raw projected features instead of unit vectors",
    )
    parser.add_argument(
        "--exclude-absent",
        action="store_true",
        default=None,
        help="Leave classes without a prototype out of the softmax",
    )
    parser.add_argument("--source-loss", type=float, help="Source cross-entropy term")
    parser.add_argument("--target-loss", type=float, help="Target cross-entropy term")


class ProtoLossCommand:
    """Proto-loss command handler."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = output_dir(config)
        self.align = config.align_config()
        self.bank: Optional[PrototypeBank] = None
        self.head: Optional[ProjectionHead] = None
        self.grad_dir: Optional[Path] = None

    def execute(self, args: Namespace) -> int:
        manifest = load_manifest(args.manifest)
        bank_path = Path(args.bank) if args.bank else self.out / "prototypes.npy"
        self.bank = PrototypeBank.load(bank_path, bank_path.with_suffix(".json"))
        if args.head_weight:
            self.head = ProjectionHead.load(args.head_weight, args.head_bias)
            if self.head.out_channels != self.bank.channels:
                raise DimensionError(
                    f"Projection head outputs {self.head.out_channels} channels, "
                    f"prototypes have {self.bank.channels}"
                )
        self.grad_dir = Path(args.grad_dir) if args.grad_dir else None

        report = BatchRunner(self.config.workers, "proto-loss").run(manifest, self._process)
        per_image = {r.record_id: r.payload for r in report.succeeded}
        if not report.results:
            return finish(report, "proto-loss")

        labeled = sum(p["labeled_pixels"] for p in per_image.values())
        if report.failed:
            return finish(report, "proto-loss")
        if labeled == 0:
            raise EmptyLabelsError("No labeled pixels across the manifest")

        mean_loss = sum(p["loss"] * p["labeled_pixels"] for p in per_image.values()) / labeled
        result: Dict[str, Any] = {
            "images": per_image,
            "labeled_pixels": labeled,
            "proto_loss": mean_loss,
            "temperature": self.align.temperature,
            "normalize_projected": self.align.normalize_projected,
            "exclude_absent": self.align.exclude_absent,
        }
        headline = f"proto loss: {mean_loss:.6f} over {labeled} pixels"

        if args.source_loss is not None and args.target_loss is not None:
            combined = total_loss(
                args.source_loss, args.target_loss, mean_loss, self.align.lambda_proto
            )
            result.update(
                {
                    "source_loss": args.source_loss,
                    "target_loss": args.target_loss,
                    "lambda": self.align.lambda_proto,
                    "total_loss": combined,
                }
            )
            headline += f"\ntotal loss: {combined:.6f}"

        write_json(result, self.out / "proto_loss.json")
        log_event(logger, logging.INFO, "proto loss computed", loss=mean_loss, labeled=labeled)
        return finish(report, "proto-loss", headline)

    def _process(self, record: ManifestRecord) -> Dict[str, Any]:
        inputs = record.require("features", "labels")
        features = read_features(inputs["features"])
        head = self.head or ProjectionHead.identity(features.shape[2])
        z = project(features, head)

        labels = read_label_map(inputs["labels"], self.bank.num_classes)
        labels = downsample_labels(labels, z.shape[:2])
        check_labels_present(labels, self.bank)

        if not labels.valid.any():
            logger.warning("%s has no labeled pixels at feature resolution", record.record_id)
            return {"loss": 0.0, "labeled_pixels": 0}

        loss = proto_loss(similarity(z, self.bank, self.align), labels)
        if self.grad_dir is not None:
            grad = proto_loss_grad(z, self.bank, labels, self.align)
            save_tensor(grad, self.grad_dir / f"{record.record_id}.npy")

        return {"loss": loss, "labeled_pixels": int(np.count_nonzero(labels.valid))}
