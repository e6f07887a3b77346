"""
Mask Models

Defines run-length encoded binary masks, ordered candidate mask sets, the
filtered (pairwise disjoint) mask set and the per-pixel mask-ID map.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from ..validation.input_validation import DimensionError, RLEError, ValidationError


@dataclass(frozen=True)
class BinaryMask:
    """
    Run-length encoded binary mask.

    Runs are row-major and alternate zeros/ones starting with a zeros-run,
    so a mask whose first pixel is set begins with a 0-length run.
    """

    height: int
    width: int
    runs: Tuple[int, ...]
    area: int

    def __post_init__(self):
        object.__setattr__(self, "runs", tuple(int(r) for r in self.runs))
        if self.height < 1 or self.width < 1:
            raise DimensionError(f"Mask dimensions must be >= 1, got {self.height}x{self.width}")
        if any(r < 0 for r in self.runs):
            raise RLEError("Run lengths must be non-negative")
        if sum(self.runs) != self.height * self.width:
            raise RLEError(
                f"Runs sum to {sum(self.runs)}, expected {self.height * self.width}"
            )
        ones = sum(self.runs[1::2])
        if ones != self.area:
            raise RLEError(f"Mask area {self.area} disagrees with runs ({ones})")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width


@dataclass(frozen=True)
class MaskSet:
    """Ordered list of candidate masks sharing one image size."""

    height: int
    width: int
    masks: Tuple[BinaryMask, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "masks", tuple(self.masks))
        for index, mask in enumerate(self.masks):
            if mask.shape != (self.height, self.width):
                raise DimensionError(
                    f"Mask {index} is {mask.height}x{mask.width}, "
                    f"expected {self.height}x{self.width}"
                )

    def __len__(self) -> int:
        return len(self.masks)


@dataclass(frozen=True)
class FilteredMaskSet:
    """Pairwise disjoint trimmed masks with the input index each came from."""

    height: int
    width: int
    masks: Tuple[BinaryMask, ...] = ()
    original_index: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "masks", tuple(self.masks))
        object.__setattr__(self, "original_index", tuple(int(i) for i in self.original_index))
        if len(self.masks) != len(self.original_index):
            raise ValidationError("Each retained mask needs exactly one original index")

    def __len__(self) -> int:
        return len(self.masks)

    def as_mask_set(self) -> MaskSet:
        return MaskSet(self.height, self.width, self.masks)


@dataclass(frozen=True)
class MaskIdMap:
    """H x W uint16 map: 0 = uncovered, k in 1..count = k-th retained mask."""

    ids: np.ndarray
    count: int = 0
    areas: List[int] = field(default_factory=list, compare=False)

    def __post_init__(self):
        if self.ids.ndim != 2:
            raise DimensionError(f"MaskIdMap must be H x W, got {self.ids.shape}")
        ids = np.array(self.ids, dtype=np.uint16, copy=True)
        ids.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        if ids.size and int(ids.max()) > self.count:
            raise ValidationError(f"Mask id {int(ids.max())} exceeds count {self.count}")
        if not self.areas:
            counts = np.bincount(ids.ravel(), minlength=self.count + 1)
            object.__setattr__(self, "areas", [int(c) for c in counts[1:]])

    @property
    def shape(self) -> Tuple[int, int]:
        return int(self.ids.shape[0]), int(self.ids.shape[1])

    @classmethod
    def from_ids(cls, ids: np.ndarray) -> "MaskIdMap":
        """Build a map from raw ids, checking that 1..max are all present."""
        ids = np.asarray(ids)
        count = int(ids.max()) if ids.size else 0
        areas = np.bincount(ids.ravel().astype(np.int64), minlength=count + 1)[1:]
        empty = [k + 1 for k, area in enumerate(areas) if area == 0]
        if empty:
            raise ValidationError(f"Mask ids {empty} label no pixels")
        return cls(ids, count)
