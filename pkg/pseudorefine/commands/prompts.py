"""
Prompts Command Module

Partitions each manifest image into superpixels and writes one point
prompt per region, or lays a regular point grid over it as a baseline.
"""

import logging
from argparse import Namespace
from typing import Any, Dict

from ..core.runner import BatchRunner, Skipped, is_up_to_date
from ..models.config import PROMPT_MODES, PipelineConfig
from ..models.manifest import ManifestRecord
from ..storage.documents import load_manifest, load_prompts, save_prompts
from ..storage.images import read_rgb_image, write_gray16
from ..superpixel.prompts import grid_prompts, normalize_prompts, region_centers
from ..superpixel.seeds import seeds_partition
from ..utils.logging import get_logger, log_event
from .common import add_common_arguments, finish, output_dir

logger = get_logger(__name__)


def register_prompts_parser(subparsers: Any) -> None:
    """Register prompts subcommand parser."""
    parser = subparsers.add_parser(
        "prompts",
        help="Generate superpixel-guided point prompts",
        description="Emit one prompt per superpixel, or a regular grid of prompts",
    )
    add_common_arguments(parser)
    parser.add_argument(
        "--prompt-mode",
        choices=list(PROMPT_MODES),
        help="seeds: one prompt per superpixel; grid: regular baseline grid",
    )
    parser.add_argument("--num-superpixels", type=int, help="Upper bound K on regions")
    parser.add_argument(
        "--points-per-side", type=int, help="Grid mode: points along each image side"
    )
    parser.add_argument(
        "--snap-to-region",
        action="store_true",
        default=None,
        help="Move centers that fall outside their region onto its nearest pixel",
    )


class PromptsCommand:
    """Prompts command handler."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = output_dir(config)
        self.force = False

    def execute(self, args: Namespace) -> int:
        manifest = load_manifest(args.manifest)
        self.force = bool(getattr(args, "force", False))

        report = BatchRunner(self.config.workers, "prompts").run(manifest, self._process)
        counts = [p["prompts"] for p in report.payloads()]
        headline = None
        if counts:
            headline = f"mean prompts per image: {sum(counts) / len(counts):.1f}"
        return finish(report, "prompts", headline)

    def _process(self, record: ManifestRecord) -> Any:
        image_path = record.require("image")["image"]
        prompt_path = self.out / "prompts" / f"{record.record_id}.json"
        superpixel_path = self.out / "superpixels" / f"{record.record_id}.png"
        grid = self.config.prompt_mode == "grid"
        outputs = [prompt_path] if grid else [prompt_path, superpixel_path]

        if not self.force and is_up_to_date(outputs, [image_path]):
            return Skipped(self._summary(record.record_id, len(load_prompts(prompt_path)), None))

        image = read_rgb_image(image_path)
        if grid:
            prompts = grid_prompts(image.shape[1], image.shape[0], self.config.points_per_side)
            save_prompts(prompts, prompt_path)
            log_event(
                logger, logging.INFO, "prompts generated",
                image=record.record_id, prompt_count=len(prompts), mode="grid",
            )
            return self._summary(record.record_id, len(prompts), None)

        superpixels = seeds_partition(image, self.config.seeds_params())
        centers = region_centers(superpixels, self.config.snap_to_region)
        prompts = normalize_prompts(centers, image.shape[1], image.shape[0])

        write_gray16(superpixels.ids, superpixel_path)
        save_prompts(prompts, prompt_path)

        log_event(
            logger, logging.INFO, "prompts generated",
            image=record.record_id, prompt_count=len(prompts), superpixels=superpixels.count,
        )
        return self._summary(record.record_id, len(prompts), superpixels.count)

    @staticmethod
    def _summary(record_id: str, prompts: int, superpixels: Any) -> Dict[str, Any]:
        return {"image": record_id, "prompts": prompts, "superpixels": superpixels}
