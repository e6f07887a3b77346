"""
Input Validation Module

Defines the validation error family shared by every module and the checks
applied to user-supplied artifacts before they enter the pipeline.
"""

from pathlib import Path
from typing import Any, Iterable, List, Optional, Tuple, Union

import numpy as np

from ..utils.logging import get_logger

logger = get_logger(__name__)


class ValidationError(Exception):
    """Custom exception for validation errors."""

    pass


class DimensionError(ValidationError):
    """Raised when two artifacts disagree on their spatial or channel sizes."""

    pass


class RLEError(ValidationError):
    """Raised when runs do not describe a grid of the stated size."""

    pass


class ConfigError(ValidationError):
    """Raised for invalid configuration values."""

    pass


class ProbMapError(ValidationError):
    """Raised when a probability map is not a per-pixel distribution."""

    def __init__(self, message: str, coordinate: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.coordinate = coordinate


class MissingInputError(ValidationError):
    """Raised when a pipeline stage lacks the inputs it requires."""

    def __init__(self, message: str, missing: Optional[List[str]] = None):
        super().__init__(message)
        self.missing = list(missing or [])


def validate_file_path(file_path: Union[str, Path, None], context: str = "file") -> Path:
    """Validate that an input path is given and points to an existing file."""
    if not file_path:
        raise ValidationError(f"{context.capitalize()} path cannot be empty")

    path = Path(file_path)
    if not path.is_file():
        raise MissingInputError(f"{context.capitalize()} not found: {path}", [str(path)])
    return path


def validate_same_shape(
    first: Tuple[int, ...], second: Tuple[int, ...], context: str
) -> None:
    """Raise DimensionError when two spatial shapes differ."""
    if tuple(first) != tuple(second):
        raise DimensionError(f"{context}: shape {tuple(first)} != {tuple(second)}")


def validate_unit_interval(
    value: float, name: str, allow_zero: bool = False, allow_one: bool = False
) -> None:
    """Check that a scalar lies inside (0, 1) with optional closed ends."""
    low_ok = value >= 0.0 if allow_zero else value > 0.0
    high_ok = value <= 1.0 if allow_one else value < 1.0
    if not (low_ok and high_ok):
        low = "[" if allow_zero else "("
        high = "]" if allow_one else ")"
        raise ConfigError(f"{name} must lie in {low}0, 1{high}, got {value}")


def validate_probmap(probmap: Any, tolerance: float = 1e-4) -> None:
    """
    Check that a ProbMap (or H x W x C array) holds a distribution per pixel.

    Normalization is checked first, then the entry range. The first offending
    pixel in row-major order is reported as (row, col).
    """
    probs = np.asarray(getattr(probmap, "probs", probmap))
    if probs.ndim != 3:
        raise DimensionError(f"Probability map must be H x W x C, got shape {probs.shape}")

    values = probs.astype(np.float64)
    sums = values.sum(axis=2)
    bad_sum = np.abs(sums - 1.0) > tolerance
    if bad_sum.any():
        row, col = _first_coordinate(bad_sum)
        raise ProbMapError(
            f"Pixel ({row}, {col}) sums to {sums[row, col]:.6f}, not 1 within {tolerance}",
            (row, col),
        )

    out_of_range = (values < 0.0) | (values > 1.0)
    if out_of_range.any():
        row, col = _first_coordinate(out_of_range.any(axis=2))
        raise ProbMapError(
            f"Pixel ({row}, {col}) has an entry outside [0, 1]", (row, col)
        )


def validate_class_ids(ids: Iterable[int], num_classes: int, context: str) -> List[int]:
    """Return the ids as a list after checking each lies in [0, num_classes)."""
    result = [int(c) for c in ids]
    bad = [c for c in result if c < 0 or c >= num_classes]
    if bad:
        raise ConfigError(f"{context}: class ids {bad} outside [0, {num_classes})")
    return result


def _first_coordinate(flags: np.ndarray) -> Tuple[int, int]:
    flat = int(np.flatnonzero(flags)[0])
    row, col = divmod(flat, flags.shape[1])
    return row, col
