"""
Class Prototypes

Prototypes are the l2-normalized mean feature of every class, accumulated in
float64 over labeled source pixels. Labels are brought to the feature
resolution by per-cell majority vote before accumulation.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..models.arrays import IGNORE_LABEL, LabelMap
from ..storage.tensor_io import load_tensor, save_tensor
from ..validation.input_validation import DimensionError, ValidationError
from ..utils.logging import get_logger

logger = get_logger(__name__)


class AbsentClassError(ValidationError):
    """Raised when a class without a prototype is referenced or every class is empty."""

    def __init__(self, message: str, classes: Optional[List[int]] = None):
        super().__init__(message)
        self.classes = list(classes or [])


class ZeroNormError(ValidationError):
    """Raised when a vector that must be normalized has zero length."""

    pass


def downsample_labels(labels: LabelMap, target: Tuple[int, int]) -> LabelMap:
    """
    Majority vote of each output cell's source pixels, ignore excluded.

    Source row r falls in output row floor(r * H' / H) (likewise for columns).
    Ties go to the lowest class id; an all-ignore cell stays ignore.
    """
    height, width = labels.shape
    out_h, out_w = target
    if out_h < 1 or out_w < 1 or out_h > height or out_w > width:
        raise DimensionError(f"Cannot downsample {height}x{width} labels to {out_h}x{out_w}")
    if (out_h, out_w) == (height, width):
        return labels

    cell_row = (np.arange(height) * out_h) // height
    cell_col = (np.arange(width) * out_w) // width
    cells = (cell_row[:, None] * out_w + cell_col[None, :]).ravel()

    values = labels.labels.ravel().astype(np.int64)
    valid = values != labels.ignore_value
    n_labels = int(values[valid].max()) + 1 if valid.any() else 1
    votes = np.bincount(
        cells[valid] * n_labels + values[valid], minlength=out_h * out_w * n_labels
    ).reshape(out_h * out_w, n_labels)

    result = np.argmax(votes, axis=1).astype(np.uint8)
    result[votes.sum(axis=1) == 0] = IGNORE_LABEL
    return LabelMap(result.reshape(out_h, out_w), labels.num_classes, labels.ignore_value)


@dataclass
class PrototypeAccumulator:
    """Running float64 feature sums and pixel counts per class."""

    sums: np.ndarray
    counts: np.ndarray

    @classmethod
    def empty(cls, num_classes: int, channels: int) -> "PrototypeAccumulator":
        return cls(
            np.zeros((num_classes, channels), dtype=np.float64),
            np.zeros(num_classes, dtype=np.int64),
        )

    @property
    def num_classes(self) -> int:
        return int(self.sums.shape[0])

    @property
    def channels(self) -> int:
        return int(self.sums.shape[1])

    def merge(self, other: "PrototypeAccumulator") -> "PrototypeAccumulator":
        if self.sums.shape != other.sums.shape:
            raise DimensionError(
                f"Cannot merge accumulators of shape {self.sums.shape} and {other.sums.shape}"
            )
        return PrototypeAccumulator(self.sums + other.sums, self.counts + other.counts)


def accumulate_prototypes(
    acc: PrototypeAccumulator, features: np.ndarray, labels: LabelMap
) -> PrototypeAccumulator:
    """Add every labeled pixel's feature to its class sum (returns a new accumulator)."""
    if features.ndim != 3:
        raise DimensionError(f"Features must be H' x W' x C, got {features.shape}")
    if features.shape[:2] != labels.shape:
        raise DimensionError(
            f"Features {features.shape[:2]} and labels {labels.shape} differ in size"
        )
    if features.shape[2] != acc.channels:
        raise DimensionError(
            f"Features have {features.shape[2]} channels, accumulator has {acc.channels}"
        )

    values = labels.labels.ravel().astype(np.int64)
    valid = values != labels.ignore_value
    classes = values[valid]
    if classes.size and int(classes.max()) >= acc.num_classes:
        raise ValidationError(
            f"Label {int(classes.max())} outside {acc.num_classes} prototype classes"
        )

    flat = features.reshape(-1, acc.channels)[valid].astype(np.float64)
    sums = acc.sums.copy()
    np.add.at(sums, classes, flat)
    counts = acc.counts + np.bincount(classes, minlength=acc.num_classes)
    return PrototypeAccumulator(sums, counts)


@dataclass(frozen=True)
class PrototypeBank:
    """K x C float32 unit-norm prototypes with presence flags."""

    prototypes: np.ndarray
    present: np.ndarray
    source_counts: np.ndarray

    @property
    def num_classes(self) -> int:
        return int(self.prototypes.shape[0])

    @property
    def channels(self) -> int:
        return int(self.prototypes.shape[1])

    def absent_classes(self) -> List[int]:
        return [int(c) for c in np.flatnonzero(~self.present)]

    def sidecar(self, temperature: float, normalize_projected: bool) -> Dict[str, Any]:
        return {
            "present": [bool(v) for v in self.present],
            "counts": [int(v) for v in self.source_counts],
            "temperature_default": float(temperature),
            "normalize_projected": bool(normalize_projected),
        }

    def save(
        self,
        tensor_path: Union[str, Path],
        sidecar_path: Union[str, Path],
        temperature: float,
        normalize_projected: bool,
    ) -> None:
        save_tensor(self.prototypes, tensor_path)
        Path(sidecar_path).write_text(
            json.dumps(self.sidecar(temperature, normalize_projected), indent=2, sort_keys=True)
            + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(
        cls, tensor_path: Union[str, Path], sidecar_path: Union[str, Path]
    ) -> "PrototypeBank":
        prototypes = load_tensor(tensor_path)
        if prototypes.ndim != 2:
            raise DimensionError(f"Prototype tensor must be K x C, got {prototypes.shape}")
        meta = json.loads(Path(sidecar_path).read_text(encoding="utf-8"))
        present = np.asarray(meta["present"], dtype=bool)
        counts = np.asarray(meta["counts"], dtype=np.int64)
        if len(present) != prototypes.shape[0] or len(counts) != prototypes.shape[0]:
            raise ValidationError("Prototype sidecar does not match the tensor row count")
        return cls(prototypes.astype(np.float32), present, counts)


def finalize_prototypes(acc: PrototypeAccumulator) -> PrototypeBank:
    """Average each observed class and normalize it to unit length."""
    present = acc.counts > 0
    if not present.any():
        raise AbsentClassError(
            "No class has any labeled pixel", list(range(acc.num_classes))
        )

    prototypes = np.zeros_like(acc.sums)
    means = acc.sums[present] / acc.counts[present][:, None]
    norms = np.linalg.norm(means, axis=1)
    if (norms == 0).any():
        zero = np.flatnonzero(present)[norms == 0].tolist()
        raise ZeroNormError(f"Mean feature of classes {zero} has zero norm")
    prototypes[present] = means / norms[:, None]

    absent = np.flatnonzero(~present).tolist()
    if absent:
        logger.warning("Classes without labeled pixels: %s", absent)
    return PrototypeBank(prototypes.astype(np.float32), present, acc.counts.copy())
