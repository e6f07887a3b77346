"""
Mask-Level Pseudo-Label Refinement

Pixel-level pseudo-labels come from the teacher's softmax: the argmax class
wherever the top probability exceeds tau, ignore elsewhere. Inside each mask,
pixels that also pass the softmax-margin test (top-1 minus top-2 above
tau_prime) vote; if they are unanimous on class k the whole mask becomes k,
otherwise the mask keeps its pixel-level labels.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Dict

import numpy as np

from ..models.arrays import IGNORE_LABEL, LabelMap, ProbMap
from ..models.masks import MaskIdMap
from ..validation.input_validation import (
    DimensionError,
    validate_same_shape,
    validate_unit_interval,
)
from ..utils.logging import get_logger

logger = get_logger(__name__)


class Provenance(IntEnum):
    """Where a refined label came from; values are the provenance PNG codes."""

    MASK_ASSIGNED = 0
    PIXEL_LEVEL = 1
    IGNORED = 2


@dataclass(frozen=True)
class RefineParams:
    """Thresholds for the two pixel-selection criteria."""

    tau: float = 0.968
    tau_prime: float = 0.99
    use_margin: bool = True

    def __post_init__(self):
        # the margin never exceeds 1, so tau_prime = 1 disables mask assignment
        validate_unit_interval(self.tau, "tau")
        validate_unit_interval(self.tau_prime, "tau_prime", allow_one=True)


@dataclass(frozen=True)
class RefinedLabels:
    labels: LabelMap
    provenance: np.ndarray
    before: np.ndarray
    after: np.ndarray
    assigned_masks: int = 0
    mask_count: int = 0
    stats: Dict[int, Dict[str, int]] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.stats:
            object.__setattr__(
                self,
                "stats",
                {
                    c: {"before": int(b), "after": int(a)}
                    for c, (b, a) in enumerate(zip(self.before, self.after))
                },
            )

    @property
    def labeled_before(self) -> int:
        return int(self.before.sum())

    @property
    def labeled_after(self) -> int:
        return int(self.after.sum())


def confidence_mask(p: ProbMap, tau: float) -> np.ndarray:
    """True where the top softmax probability is strictly above tau."""
    return p.probs.max(axis=2).astype(np.float64) > tau


def margin_mask(p: ProbMap, tau_prime: float) -> np.ndarray:
    """True where top-1 minus top-2 probability is strictly above tau_prime."""
    if p.classes < 2:
        raise DimensionError("Softmax margin needs at least 2 classes")
    top2 = np.partition(p.probs.astype(np.float64), -2, axis=2)[..., -2:]
    return (top2[..., 1] - top2[..., 0]) > tau_prime


def argmax_labels(p: ProbMap) -> LabelMap:
    """Per-pixel argmax; np.argmax returns the lowest index among ties."""
    return LabelMap(np.argmax(p.probs, axis=2).astype(np.uint8), p.classes)


def threshold_labels(p: ProbMap, tau: float) -> LabelMap:
    """Argmax where confident, ignore elsewhere."""
    labels = argmax_labels(p).labels.copy()
    labels[~confidence_mask(p, tau)] = IGNORE_LABEL
    return LabelMap(labels, p.classes)


def refine(p: ProbMap, idmap: MaskIdMap, params: RefineParams) -> RefinedLabels:
    """Assign each mask a class when its selected pixels agree unanimously."""
    validate_same_shape(p.shape, idmap.shape, "ProbMap vs MaskIdMap")

    pixel_level = threshold_labels(p, params.tau)
    argmax = np.argmax(p.probs, axis=2).astype(np.int64)
    selected = confidence_mask(p, params.tau)
    if params.use_margin:
        selected &= margin_mask(p, params.tau_prime)

    ids = idmap.ids.astype(np.int64)
    n_masks = idmap.count
    voters = selected & (ids > 0)

    # per-mask min and max of the voting classes; unanimous iff they match
    lowest = np.full(n_masks + 1, np.iinfo(np.int64).max)
    highest = np.full(n_masks + 1, -1)
    np.minimum.at(lowest, ids[voters], argmax[voters])
    np.maximum.at(highest, ids[voters], argmax[voters])
    mask_class = np.where((highest >= 0) & (lowest == highest), highest, -1)
    mask_class[0] = -1

    pixel_class = mask_class[ids]
    assigned = pixel_class >= 0
    refined = pixel_level.labels.copy()
    refined[assigned] = pixel_class[assigned].astype(np.uint8)

    provenance = np.full(refined.shape, Provenance.PIXEL_LEVEL, dtype=np.uint8)
    provenance[refined == IGNORE_LABEL] = Provenance.IGNORED
    provenance[assigned] = Provenance.MASK_ASSIGNED

    labels = LabelMap(refined, p.classes)
    before = pixel_level.class_counts(p.classes)
    after = labels.class_counts(p.classes)
    assigned_masks = int(np.count_nonzero(mask_class >= 0))

    logger.debug(
        "Refined %d of %d masks; labeled pixels %d -> %d",
        assigned_masks, n_masks, int(before.sum()), int(after.sum()),
    )
    return RefinedLabels(labels, provenance, before, after, assigned_masks, n_masks)


def refine_summary(result: RefinedLabels) -> Dict[str, Any]:
    """Labeled-pixel totals before/after refinement, the gain and per-class counts."""
    return {
        "before": result.labeled_before,
        "after": result.labeled_after,
        "gain": result.labeled_after - result.labeled_before,
        "assigned_masks": result.assigned_masks,
        "mask_count": result.mask_count,
        "per_class": {str(c): counts for c, counts in result.stats.items()},
    }
