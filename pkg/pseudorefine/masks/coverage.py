"""
Mask Coverage Statistics

Per-image prompt count, retained-mask count and covered-pixel fraction,
plus the cross-image averages reported as "<prompts>, <masks>, <cov> %".
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from ..models.masks import MaskIdMap
from ..validation.input_validation import ValidationError


@dataclass(frozen=True)
class CoverageStats:
    """Coverage of one image's mask-id map."""

    prompt_count: int
    mask_count: int
    covered_pixels: int
    total_pixels: int

    @property
    def coverage(self) -> float:
        return self.covered_pixels / self.total_pixels if self.total_pixels else 0.0

    def table_row(self, include_prompts: bool = False) -> str:
        return format_coverage_row(
            self.mask_count, self.coverage, self.prompt_count if include_prompts else None
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["coverage"] = self.coverage
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CoverageStats":
        return cls(
            int(data["prompt_count"]),
            int(data["mask_count"]),
            int(data["covered_pixels"]),
            int(data["total_pixels"]),
        )


@dataclass(frozen=True)
class CoverageSummary:
    """Averages over a set of images."""

    images: int
    mean_prompts: float
    mean_masks: float
    mean_coverage: float

    def table_row(self) -> str:
        return format_coverage_row(
            round(self.mean_masks), self.mean_coverage, round(self.mean_prompts)
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def coverage_stats(idmap: MaskIdMap, prompt_count: int) -> CoverageStats:
    if prompt_count < 0:
        raise ValidationError(f"Prompt count must be >= 0, got {prompt_count}")
    covered = int(np.count_nonzero(idmap.ids))
    return CoverageStats(int(prompt_count), int(idmap.count), covered, int(idmap.ids.size))


def format_coverage_row(
    mask_count: int, coverage: float, prompt_count: Optional[int] = None
) -> str:
    """Render e.g. "117, 91.46 %" (prompt count prepended when given)."""
    cells: List[str] = []
    if prompt_count is not None:
        cells.append(str(int(prompt_count)))
    cells.append(str(int(mask_count)))
    cells.append(f"{coverage * 100:.2f} %")
    return ", ".join(cells)


def aggregate_coverage(stats: Iterable[CoverageStats]) -> CoverageSummary:
    items = list(stats)
    if not items:
        return CoverageSummary(0, 0.0, 0.0, 0.0)
    return CoverageSummary(
        images=len(items),
        mean_prompts=float(np.mean([s.prompt_count for s in items])),
        mean_masks=float(np.mean([s.mask_count for s in items])),
        mean_coverage=float(np.mean([s.coverage for s in items])),
    )
