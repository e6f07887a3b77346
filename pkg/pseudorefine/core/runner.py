"""
Batch Runner

Runs one task per manifest record on a bounded thread pool. Results are
returned in manifest order whatever order the workers finish in; a failing
record is logged and recorded without stopping the others.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, List, Optional

from ..models.manifest import Manifest, ManifestRecord
from ..utils.logging import get_logger, log_event

logger = get_logger(__name__)


@dataclass
class RecordResult:
    """Outcome of one record's task."""

    record_id: str
    index: int
    ok: bool
    skipped: bool = False
    payload: Any = None
    error: Optional[str] = None


@dataclass
class RunReport:
    """All record outcomes, in manifest order, plus the order they completed in."""

    results: List[RecordResult] = field(default_factory=list)
    completion_order: List[int] = field(default_factory=list)

    @property
    def succeeded(self) -> List[RecordResult]:
        return [r for r in self.results if r.ok]

    @property
    def failed(self) -> List[RecordResult]:
        return [r for r in self.results if not r.ok]

    @property
    def skipped(self) -> List[RecordResult]:
        return [r for r in self.results if r.skipped]

    @property
    def exit_code(self) -> int:
        return 0 if not self.failed else 1

    def payloads(self, strict_order: bool = True) -> List[Any]:
        """Payloads of successful records, in manifest or completion order."""
        if strict_order:
            return [r.payload for r in self.succeeded]
        by_index = {r.index: r for r in self.results}
        return [by_index[i].payload for i in self.completion_order if by_index[i].ok]

    def summary(self) -> dict:
        return {
            "records": len(self.results),
            "succeeded": len(self.succeeded),
            "skipped": len(self.skipped),
            "failed": len(self.failed),
            "errors": {r.record_id: r.error for r in self.failed},
        }


class Skipped:
    """Task return wrapper marking a record whose outputs were already current."""

    def __init__(self, payload: Any):
        self.payload = payload


class BatchRunner:
    """Bounded worker pool over manifest records."""

    def __init__(self, workers: int = 1, stage: str = "batch"):
        self.workers = max(1, int(workers))
        self.stage = stage

    def run(self, manifest: Manifest, task: Callable[[ManifestRecord], Any]) -> RunReport:
        records = list(manifest)
        report = RunReport()
        if not records:
            logger.warning("Manifest has no records; nothing to do for %s", self.stage)
            return report

        log_event(
            logger, logging.INFO, "stage started",
            stage=self.stage, records=len(records), workers=self.workers,
        )
        slots: List[Optional[RecordResult]] = [None] * len(records)

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = {pool.submit(self._run_one, task, record): record for record in records}
            for future in as_completed(futures):
                record = futures[future]
                slots[record.index] = future.result()
                report.completion_order.append(record.index)

        report.results = [slot for slot in slots if slot is not None]
        log_event(
            logger, logging.INFO, "stage finished",
            stage=self.stage,
            succeeded=len(report.succeeded),
            skipped=len(report.skipped),
            failed=len(report.failed),
        )
        return report

    def _run_one(
        self, task: Callable[[ManifestRecord], Any], record: ManifestRecord
    ) -> RecordResult:
        try:
            outcome = task(record)
        except Exception as e:
            error = f"{type(e).__name__}: {e}"
            log_event(
                logger, logging.ERROR, "record failed",
                stage=self.stage, image=record.record_id, error=error,
            )
            logger.debug("Traceback for %s", record.record_id, exc_info=True)
            return RecordResult(record.record_id, record.index, False, error=error)

        if isinstance(outcome, Skipped):
            logger.debug("Outputs for %s are current, skipping", record.record_id)
            return RecordResult(record.record_id, record.index, True, True, outcome.payload)
        return RecordResult(record.record_id, record.index, True, payload=outcome)


def is_up_to_date(outputs: Iterable[Path], inputs: Iterable[Path]) -> bool:
    """True when every output exists and none is older than any existing input."""
    outputs = [Path(p) for p in outputs]
    if not outputs or not all(p.is_file() for p in outputs):
        return False
    input_times = [Path(p).stat().st_mtime_ns for p in inputs if Path(p).is_file()]
    if not input_times:
        return True
    return min(p.stat().st_mtime_ns for p in outputs) >= max(input_times)
