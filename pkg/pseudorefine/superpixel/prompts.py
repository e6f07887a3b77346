"""
Superpixel Point Prompts

Derives one representative point per superpixel (per-axis median of the
region's pixel coordinates) and normalizes it to [0, 1) image coordinates.
A regular point grid is available as the baseline prompt layout.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..validation.input_validation import ValidationError
from .seeds import SuperpixelMap

Point = Tuple[int, int]


@dataclass(frozen=True)
class PointPromptSet:
    """Normalized (x, y) prompts with the region each one came from."""

    points: Tuple[Tuple[float, float], ...]
    source_region: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((float(x), float(y)) for x, y in self.points))
        object.__setattr__(self, "source_region", tuple(int(r) for r in self.source_region))
        if len(self.points) != len(self.source_region):
            raise ValidationError("Each prompt needs exactly one source region")
        for x, y in self.points:
            if not (0.0 <= x < 1.0 and 0.0 <= y < 1.0):
                raise ValidationError(f"Prompt ({x}, {y}) outside [0, 1)")

    def __len__(self) -> int:
        return len(self.points)


def region_centers(sp: SuperpixelMap, snap_to_region: bool = False) -> List[Point]:
    """
    Per-axis lower-median center of every region, indexed by region id.

    With snap_to_region, a center that falls outside its (non-convex) region
    is replaced by the nearest region pixel, ties resolved in raster order.
    """
    ids = sp.ids
    height, width = ids.shape
    flat = ids.ravel()
    order = np.argsort(flat, kind="stable")
    bounds = np.concatenate(([0], np.cumsum(np.bincount(flat, minlength=sp.count))))

    centers: List[Point] = []
    for region in range(sp.count):
        members = order[bounds[region]:bounds[region + 1]]
        ys, xs = np.divmod(members, width)
        cx = int(np.sort(xs)[(len(xs) - 1) // 2])
        cy = int(np.sort(ys)[(len(ys) - 1) // 2])
        if snap_to_region and ids[cy, cx] != region:
            # members are in raster order, so argmin picks the first nearest pixel
            nearest = int(np.argmin((xs - cx) ** 2 + (ys - cy) ** 2))
            cx, cy = int(xs[nearest]), int(ys[nearest])
        centers.append((cx, cy))
    return centers


def normalize_prompts(
    centers: Sequence[Point], width: int, height: int
) -> PointPromptSet:
    """Map pixel centers to (x / W, y / H)."""
    points = []
    for x, y in centers:
        if not (0 <= x < width and 0 <= y < height):
            raise ValidationError(f"Center ({x}, {y}) outside a {width}x{height} image")
        points.append((x / width, y / height))
    return PointPromptSet(tuple(points), tuple(range(len(points))))


def grid_prompts(width: int, height: int, points_per_side: int = 32) -> PointPromptSet:
    """
    Regular points_per_side x points_per_side baseline grid.

    Points sit at the centers of equal cells in normalized coordinates, are
    snapped to the pixel they fall in, and are listed row by row.
    """
    if points_per_side < 1:
        raise ValidationError(f"points_per_side must be >= 1, got {points_per_side}")
    if width < 1 or height < 1:
        raise ValidationError(f"Image must be at least 1x1, got {width}x{height}")

    offset = 1.0 / (2 * points_per_side)
    coords = np.linspace(offset, 1.0 - offset, points_per_side)
    centers = [(int(x * width), int(y * height)) for y in coords for x in coords]
    return normalize_prompts(centers, width, height)
