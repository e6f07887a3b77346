"""
Array Models

Defines the dense array carriers used across the pipeline: plain tensors
(numpy arrays restricted to four element types), per-pixel probability maps
and semantic label maps.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..validation.input_validation import DimensionError, ValidationError

SUPPORTED_DTYPES = (
    np.dtype(np.float32),
    np.dtype(np.float64),
    np.dtype(np.uint8),
    np.dtype(np.uint16),
)

IGNORE_LABEL = 255


def check_tensor(array: np.ndarray) -> np.ndarray:
    """Check the dense-tensor invariants: supported dtype and no empty axes."""
    if array.dtype.newbyteorder("=") not in SUPPORTED_DTYPES:
        raise ValidationError(f"Unsupported tensor dtype: {array.dtype}")
    if array.ndim == 0 or any(dim < 1 for dim in array.shape):
        raise ValidationError(f"Tensor shape entries must be >= 1, got {array.shape}")
    return array


def _frozen(array: np.ndarray) -> np.ndarray:
    view = np.array(array, copy=True)
    view.setflags(write=False)
    return view


@dataclass(frozen=True)
class ProbMap:
    """Per-pixel softmax distribution of shape H x W x C."""

    probs: np.ndarray

    def __post_init__(self):
        if self.probs.ndim != 3:
            raise DimensionError(f"ProbMap must be H x W x C, got {self.probs.shape}")
        object.__setattr__(self, "probs", _frozen(self.probs.astype(np.float32)))

    @property
    def height(self) -> int:
        return int(self.probs.shape[0])

    @property
    def width(self) -> int:
        return int(self.probs.shape[1])

    @property
    def classes(self) -> int:
        return int(self.probs.shape[2])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width


@dataclass(frozen=True)
class LabelMap:
    """H x W uint8 class ids with 255 reserved for ignore."""

    labels: np.ndarray
    num_classes: Optional[int] = None
    ignore_value: int = IGNORE_LABEL

    def __post_init__(self):
        if self.labels.ndim != 2:
            raise DimensionError(f"LabelMap must be H x W, got {self.labels.shape}")
        labels = np.asarray(self.labels)
        if labels.size and (labels.min() < 0 or labels.max() > 255):
            raise ValidationError("Label ids must fit in 8 bits")
        labels = labels.astype(np.uint8)
        if self.num_classes is not None:
            valid = labels[labels != self.ignore_value]
            if valid.size and int(valid.max()) >= self.num_classes:
                raise ValidationError(
                    f"Label {int(valid.max())} outside class count {self.num_classes}"
                )
        object.__setattr__(self, "labels", _frozen(labels))

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    @property
    def valid(self) -> np.ndarray:
        """Boolean H x W grid of non-ignore pixels."""
        return self.labels != self.ignore_value

    def labeled_count(self) -> int:
        return int(np.count_nonzero(self.valid))

    def class_counts(self, num_classes: int) -> np.ndarray:
        """Labeled-pixel count per class id in [0, num_classes)."""
        values = self.labels[self.valid].astype(np.int64)
        return np.bincount(values, minlength=num_classes)[:num_classes]
