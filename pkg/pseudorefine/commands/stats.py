"""
Stats Command Module

Averages the per-image coverage records written by the filter stage.
"""

from argparse import Namespace
from typing import Any

from ..core.runner import BatchRunner
from ..masks.coverage import CoverageStats, aggregate_coverage
from ..models.config import PipelineConfig
from ..models.manifest import ManifestRecord
from ..storage.documents import load_manifest, read_json, write_json
from .common import add_common_arguments, finish, output_dir


def register_stats_parser(subparsers: Any) -> None:
    """Register stats subcommand parser."""
    parser = subparsers.add_parser(
        "stats",
        help="Summarize prompt count, mask count and coverage",
        description="Average the filter stage's per-image coverage over the manifest",
    )
    add_common_arguments(parser)


class StatsCommand:
    """Stats command handler."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = output_dir(config)

    def execute(self, args: Namespace) -> int:
        manifest = load_manifest(args.manifest)
        report = BatchRunner(self.config.workers, "stats").run(manifest, self._process)
        if not report.results:
            return finish(report, "stats")

        summary = aggregate_coverage(report.payloads())
        data = summary.to_dict()
        data["table_row"] = summary.table_row()
        write_json(data, self.out / "coverage_summary.json")
        return finish(report, "stats", f"prompts, masks, coverage: {summary.table_row()}")

    def _process(self, record: ManifestRecord) -> CoverageStats:
        return CoverageStats.from_dict(
            read_json(self.out / "coverage" / f"{record.record_id}.json")
        )
