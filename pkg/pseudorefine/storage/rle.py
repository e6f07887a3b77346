"""
Run-Length Mask Codec

Row-major alternating run lengths starting with a zeros-run.
"""

import numpy as np

from ..models.masks import BinaryMask
from ..validation.input_validation import DimensionError, RLEError


def encode_rle(pixels: np.ndarray) -> BinaryMask:
    """Encode an H x W boolean grid."""
    grid = np.asarray(pixels)
    if grid.ndim != 2 or grid.size == 0:
        raise DimensionError(f"Mask grid must be a nonempty H x W array, got {grid.shape}")

    flat = grid.ravel().astype(bool)
    # A leading False pad makes a mask starting with a set pixel open with a 0-run.
    padded = np.concatenate(([False], flat, [not flat[-1]]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    runs = np.diff(np.concatenate(([0], edges)))

    height, width = grid.shape
    return BinaryMask(height, width, tuple(int(r) for r in runs), int(flat.sum()))


def decode_rle(mask: BinaryMask) -> np.ndarray:
    """Decode a mask back to its H x W boolean grid."""
    runs = np.asarray(mask.runs, dtype=np.int64)
    total = mask.height * mask.width
    if runs.sum() != total:
        raise RLEError(f"Runs sum to {int(runs.sum())}, expected {total}")

    values = np.arange(len(runs)) % 2 == 1
    flat = np.repeat(values, runs)
    return flat.reshape(mask.height, mask.width)
