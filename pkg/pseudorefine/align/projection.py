"""
Projection Head

A per-pixel linear map (a 1x1 convolution) from encoder channels to the
prototype space: z = f W + b.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..storage.tensor_io import load_tensor
from ..validation.input_validation import DimensionError, ValidationError


@dataclass(frozen=True)
class ProjectionHead:
    """weight: C_enc x C_proto, bias: C_proto."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        if self.weight.ndim != 2:
            raise DimensionError(f"Projection weight must be 2-D, got {self.weight.shape}")
        if self.bias.shape != (self.weight.shape[1],):
            raise DimensionError(
                f"Bias shape {self.bias.shape} does not match weight {self.weight.shape}"
            )
        if not (np.isfinite(self.weight).all() and np.isfinite(self.bias).all()):
            raise ValidationError("Projection head has non-finite entries")

    @property
    def in_channels(self) -> int:
        return int(self.weight.shape[0])

    @property
    def out_channels(self) -> int:
        return int(self.weight.shape[1])

    @classmethod
    def identity(cls, channels: int) -> "ProjectionHead":
        return cls(np.eye(channels), np.zeros(channels))

    @classmethod
    def load(
        cls, weight_path: Union[str, Path], bias_path: Optional[Union[str, Path]] = None
    ) -> "ProjectionHead":
        weight = load_tensor(weight_path).astype(np.float64)
        if bias_path is None:
            bias = np.zeros(weight.shape[1] if weight.ndim == 2 else 0)
        else:
            bias = load_tensor(bias_path).astype(np.float64).ravel()
        return cls(weight, bias)


def project(features: np.ndarray, head: ProjectionHead) -> np.ndarray:
    """Apply the head to an H' x W' x C_enc map, giving H' x W' x C_proto (float64)."""
    if features.ndim != 3:
        raise DimensionError(f"Features must be H' x W' x C, got {features.shape}")
    if features.shape[2] != head.in_channels:
        raise DimensionError(
            f"Features have {features.shape[2]} channels, head expects {head.in_channels}"
        )
    return features.astype(np.float64) @ head.weight.astype(np.float64) + head.bias
