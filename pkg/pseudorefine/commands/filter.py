"""
Filter Command Module

Trims each image's candidate masks to a disjoint set, writes the mask-ID
map and records mask coverage.
"""

import logging
from argparse import Namespace
from pathlib import Path
from typing import Any

from ..core.runner import BatchRunner, Skipped, is_up_to_date
from ..masks.coverage import CoverageStats, aggregate_coverage, coverage_stats
from ..masks.filtering import build_mask_id_map, overlap_filter
from ..models.config import PipelineConfig
from ..models.manifest import ManifestRecord
from ..storage.documents import (
    load_manifest,
    load_mask_set,
    load_prompts,
    read_json,
    write_csv,
    write_json,
)
from ..storage.images import write_mask_id_map
from ..utils.logging import get_logger, log_event
from .common import add_common_arguments, finish, output_dir

logger = get_logger(__name__)

COVERAGE_HEADER = ("image", "prompts", "masks", "covered_pixels", "total_pixels", "coverage")


def register_filter_parser(subparsers: Any) -> None:
    """Register filter subcommand parser."""
    parser = subparsers.add_parser(
        "filter",
        help="Filter overlapping masks into a mask-ID map",
        description="Greedy area-descending overlap removal and coverage statistics",
    )
    add_common_arguments(parser)


class FilterCommand:
    """Filter command handler."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = output_dir(config)
        self.force = False

    def execute(self, args: Namespace) -> int:
        manifest = load_manifest(args.manifest)
        self.force = bool(getattr(args, "force", False))

        report = BatchRunner(self.config.workers, "filter").run(manifest, self._process)
        results = [
            (r.record_id, CoverageStats.from_dict(r.payload)) for r in report.succeeded
        ]

        headline = None
        if results:
            write_csv(
                (
                    [rid, s.prompt_count, s.mask_count, s.covered_pixels, s.total_pixels,
                     f"{s.coverage:.6f}"]
                    for rid, s in results
                ),
                COVERAGE_HEADER,
                self.out / "coverage.csv",
            )
            headline = aggregate_coverage(s for _, s in results).table_row()
        return finish(report, "filter", headline)

    def _process(self, record: ManifestRecord) -> Any:
        masks_path = record.require("masks")["masks"]
        idmap_path = self.out / "maskids" / f"{record.record_id}.png"
        stats_path = self.out / "coverage" / f"{record.record_id}.json"
        prompt_path = self.out / "prompts" / f"{record.record_id}.json"

        if not self.force and is_up_to_date([idmap_path, stats_path], [masks_path, prompt_path]):
            return Skipped(read_json(stats_path))

        candidates = load_mask_set(masks_path)
        filtered = overlap_filter(candidates)
        idmap = build_mask_id_map(filtered, candidates.height, candidates.width)
        stats = coverage_stats(idmap, self._prompt_count(record, prompt_path))

        write_mask_id_map(idmap, idmap_path)
        payload = stats.to_dict()
        payload["image"] = record.record_id
        payload["candidates"] = len(candidates)
        write_json(payload, stats_path)

        log_event(
            logger, logging.INFO, "masks filtered",
            image=record.record_id, candidates=len(candidates),
            mask_count=stats.mask_count, coverage=round(stats.coverage, 6),
        )
        return payload

    @staticmethod
    def _prompt_count(record: ManifestRecord, prompt_path: Path) -> int:
        if prompt_path.is_file():
            return len(load_prompts(prompt_path))
        logger.debug("No prompt file for %s; prompt count recorded as 0", record.record_id)
        return 0
