"""
PNG Image I/O

8-bit grayscale label maps, 16-bit grayscale id maps (superpixels and mask
ids) and RGB input images, all through Pillow.
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image

from ..models.arrays import LabelMap
from ..models.masks import MaskIdMap
from ..validation.input_validation import ValidationError
from ..utils.logging import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


def read_rgb_image(path: PathLike) -> np.ndarray:
    """Read an image as H x W x 3 uint8."""
    try:
        with Image.open(path) as img:
            return np.array(img.convert("RGB"), dtype=np.uint8)
    except (OSError, ValueError) as e:
        raise ValidationError(f"Unreadable image {path}: {e}") from e


def write_gray8(array: np.ndarray, path: PathLike) -> None:
    """Write an H x W uint8 array as an 8-bit grayscale PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(array, dtype=np.uint8)).save(path, format="PNG")


def read_gray8(path: PathLike) -> np.ndarray:
    with Image.open(path) as img:
        if img.mode not in ("L", "P"):
            raise ValidationError(f"{path}: expected 8-bit grayscale PNG, got mode {img.mode}")
        return np.array(img, dtype=np.uint8)


def write_gray16(array: np.ndarray, path: PathLike) -> None:
    """Write an H x W array with values < 65536 as a 16-bit grayscale PNG."""
    values = np.asarray(array)
    if values.size and (values.min() < 0 or values.max() > 0xFFFF):
        raise ValidationError(f"Values out of 16-bit range for {path}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(values, dtype=np.uint16)).save(path, format="PNG")


def read_gray16(path: PathLike) -> np.ndarray:
    with Image.open(path) as img:
        # Pillow opens 16-bit grayscale PNGs as "I;16" or "I" depending on version.
        if img.mode not in ("I;16", "I", "L"):
            raise ValidationError(f"{path}: expected 16-bit grayscale PNG, got mode {img.mode}")
        values = np.array(img)
    if values.size and (values.min() < 0 or values.max() > 0xFFFF):
        raise ValidationError(f"{path}: values out of 16-bit range")
    return values.astype(np.uint16)


def read_label_map(path: PathLike, num_classes: Optional[int] = None) -> LabelMap:
    return LabelMap(read_gray8(path), num_classes)


def write_label_map(labels: LabelMap, path: PathLike) -> None:
    write_gray8(labels.labels, path)


def read_mask_id_map(path: PathLike) -> MaskIdMap:
    return MaskIdMap.from_ids(read_gray16(path))


def write_mask_id_map(idmap: MaskIdMap, path: PathLike) -> None:
    write_gray16(idmap.ids, path)
