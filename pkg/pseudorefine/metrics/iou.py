"""
Segmentation Metrics

Confusion matrices accumulated over images and the per-class IoU / mIoU
report printed in the usual Cityscapes column order.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..models.arrays import LabelMap
from ..validation.input_validation import ConfigError, ValidationError, validate_same_shape

CITYSCAPES_CLASSES = (
    "Road", "S.walk", "Build.", "Wall", "Fence", "Pole", "Tr.Light", "Sign", "Veget.",
    "Terrain", "Sky", "Person", "Rider", "Car", "Truck", "Bus", "Train", "M.bike", "Bike",
)

# terrain, truck and train have no SYNTHIA counterpart
SYNTHIA_EXCLUDED = (9, 14, 16)
SYNTHIA_16 = tuple(c for c in range(len(CITYSCAPES_CLASSES)) if c not in SYNTHIA_EXCLUDED)

SUBSET_PRESETS = {
    "19": tuple(range(len(CITYSCAPES_CLASSES))),
    "16": SYNTHIA_16,
}

COLUMN_WIDTH = 9


def class_subset_preset(name: str) -> List[int]:
    if name not in SUBSET_PRESETS:
        raise ConfigError(f"Unknown class subset '{name}'. Use one of {sorted(SUBSET_PRESETS)}")
    return list(SUBSET_PRESETS[name])


@dataclass
class ConfusionMatrix:
    """counts[g][p]: pixels of ground-truth class g predicted as p."""

    counts: np.ndarray
    ignored: int = 0

    @classmethod
    def zeros(cls, num_classes: int) -> "ConfusionMatrix":
        return cls(np.zeros((num_classes, num_classes), dtype=np.int64), 0)

    @property
    def num_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.counts.shape != other.counts.shape:
            raise ValidationError(
                f"Cannot add confusion matrices of {self.num_classes} "
                f"and {other.num_classes} classes"
            )
        return ConfusionMatrix(self.counts + other.counts, self.ignored + other.ignored)

    def to_dict(self) -> Dict[str, Any]:
        return {"counts": self.counts.tolist(), "ignored": self.ignored}


def confusion(pred: LabelMap, gt: LabelMap, num_classes: int) -> ConfusionMatrix:
    """Count (gt, pred) pairs over every pixel whose ground truth is not ignore."""
    validate_same_shape(pred.shape, gt.shape, "prediction vs ground truth")

    keep = gt.valid
    truth = gt.labels[keep].astype(np.int64)
    guess = pred.labels[keep].astype(np.int64)
    for name, values in (("ground truth", truth), ("prediction", guess)):
        if values.size and int(values.max()) >= num_classes:
            raise ValidationError(
                f"{name} class {int(values.max())} outside {num_classes} classes"
            )

    counts = np.bincount(truth * num_classes + guess, minlength=num_classes ** 2)
    return ConfusionMatrix(
        counts.reshape(num_classes, num_classes).astype(np.int64),
        int(np.count_nonzero(~keep)),
    )


@dataclass(frozen=True)
class IoUReport:
    """Per-class IoU (None where undefined) and the mean over a class subset."""

    per_class: Dict[int, Optional[float]]
    class_subset: List[int]
    miou: Optional[float]
    class_names: Sequence[str] = field(default=CITYSCAPES_CLASSES, compare=False)

    def name(self, class_id: int) -> str:
        if class_id < len(self.class_names):
            return self.class_names[class_id]
        return str(class_id)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_class": {self.name(c): v for c, v in self.per_class.items()},
            "class_subset": list(self.class_subset),
            "miou": self.miou,
        }


def iou_report(cm: ConfusionMatrix, class_subset: Sequence[int]) -> IoUReport:
    """
    IoU_c = TP / (TP + FP + FN).

    A class with a zero denominator is undefined and left out of the mean.
    """
    subset = [int(c) for c in class_subset]
    if not subset:
        raise ValidationError("Class subset for mIoU must not be empty")
    bad = [c for c in subset if not 0 <= c < cm.num_classes]
    if bad:
        raise ValidationError(f"Class subset entries {bad} outside {cm.num_classes} classes")

    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    union = counts.sum(axis=0) + counts.sum(axis=1) - tp

    per_class: Dict[int, Optional[float]] = {}
    for c in range(cm.num_classes):
        per_class[c] = float(tp[c] / union[c]) if union[c] > 0 else None

    defined = [per_class[c] for c in subset if per_class[c] is not None]
    miou = float(np.mean(defined)) if defined else None
    return IoUReport(per_class, subset, miou)


def format_table_header(num_classes: int = len(CITYSCAPES_CLASSES)) -> str:
    names = [CITYSCAPES_CLASSES[c] if c < len(CITYSCAPES_CLASSES) else str(c)
             for c in range(num_classes)]
    return "".join(f"{n:>{COLUMN_WIDTH}}" for n in names + ["mIoU"])


def format_table_row(report: IoUReport) -> str:
    """Percentages to one decimal; classes outside the subset or undefined print "--"."""
    cells = []
    subset = set(report.class_subset)
    for c, value in report.per_class.items():
        if c not in subset or value is None:
            cells.append("--")
        else:
            cells.append(f"{value * 100:.1f}")
    cells.append("--" if report.miou is None else f"{report.miou * 100:.1f}")
    return "".join(f"{cell:>{COLUMN_WIDTH}}" for cell in cells)
