"""
Overlap-Aware Mask Filtering

Candidates are visited in descending order of their original area (ties by
input index). Each keeps only the pixels no earlier mask has claimed; masks
whose remainder is empty are dropped. Retained masks are then numbered
1..K in visiting order to form the mask-ID map.
"""

import numpy as np

from ..models.masks import FilteredMaskSet, MaskIdMap, MaskSet
from ..storage.rle import decode_rle, encode_rle
from ..validation.input_validation import DimensionError, ValidationError
from ..utils.logging import get_logger

logger = get_logger(__name__)


class OverlapError(ValidationError):
    """Raised when masks handed to the id-map builder overlap."""

    pass


def overlap_filter(candidates: MaskSet) -> FilteredMaskSet:
    """Greedy area-descending trimming of a candidate mask set."""
    shape = (candidates.height, candidates.width)
    for index, mask in enumerate(candidates.masks):
        if mask.shape != shape:
            raise DimensionError(f"Mask {index} is {mask.shape}, expected {shape}")

    order = sorted(
        range(len(candidates.masks)),
        key=lambda i: (-candidates.masks[i].area, i),
    )

    assigned = np.zeros(shape, dtype=bool)
    kept = []
    kept_index = []
    for index in order:
        remainder = decode_rle(candidates.masks[index]) & ~assigned
        if not remainder.any():
            continue
        kept.append(encode_rle(remainder))
        kept_index.append(index)
        assigned |= remainder

    logger.debug("Overlap filter kept %d of %d masks", len(kept), len(candidates.masks))
    return FilteredMaskSet(candidates.height, candidates.width, tuple(kept), tuple(kept_index))


def build_mask_id_map(filtered: FilteredMaskSet, height: int, width: int) -> MaskIdMap:
    """Number retained masks 1..K; uncovered pixels stay 0."""
    if (filtered.height, filtered.width) != (height, width):
        raise DimensionError(
            f"Filtered masks are {filtered.height}x{filtered.width}, expected {height}x{width}"
        )

    if len(filtered.masks) > np.iinfo(np.uint16).max:
        raise ValidationError(f"{len(filtered.masks)} masks exceed the 16-bit id range")

    ids = np.zeros((height, width), dtype=np.uint16)
    areas = []
    for mask_id, mask in enumerate(filtered.masks, start=1):
        pixels = decode_rle(mask)
        if (ids[pixels] != 0).any():
            raise OverlapError(f"Mask {mask_id} overlaps an earlier mask")
        ids[pixels] = mask_id
        areas.append(int(mask.area))
    return MaskIdMap(ids, len(filtered.masks), areas)
