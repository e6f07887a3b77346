"""
Tensor File I/O

Reads and writes dense tensors in the .npy version 1.0 layout
(magic, header dict, little-endian C-order payload), restricted to
float32, float64, uint8 and uint16.
"""

from pathlib import Path
from typing import Union

import numpy as np
from numpy.lib import format as npy_format

from ..models.arrays import SUPPORTED_DTYPES, check_tensor
from ..validation.input_validation import ValidationError
from ..utils.logging import get_logger

logger = get_logger(__name__)


class TensorFormatError(ValidationError):
    """Raised for malformed, unsupported or truncated tensor files."""

    pass


def load_tensor(path: Union[str, Path]) -> np.ndarray:
    """Load a tensor file, checking header, dtype and payload length."""
    path = Path(path)
    with open(path, "rb") as fh:
        try:
            version = npy_format.read_magic(fh)
        except ValueError as e:
            raise TensorFormatError(f"{path}: malformed header: {e}") from e
        if version != (1, 0):
            raise TensorFormatError(f"{path}: unsupported .npy version {version}")
        try:
            shape, fortran_order, dtype = npy_format.read_array_header_1_0(fh)
        except ValueError as e:
            raise TensorFormatError(f"{path}: malformed header: {e}") from e

        if fortran_order:
            raise TensorFormatError(f"{path}: Fortran-ordered payloads are not supported")
        if dtype.str.startswith(">"):
            raise TensorFormatError(f"{path}: big-endian payloads are not supported ({dtype.str})")
        if dtype.newbyteorder("=") not in SUPPORTED_DTYPES:
            raise TensorFormatError(f"{path}: unsupported dtype {dtype}")
        if len(shape) == 0 or any(dim < 1 for dim in shape):
            raise TensorFormatError(f"{path}: shape entries must be >= 1, got {shape}")

        count = int(np.prod(shape))
        expected = count * dtype.itemsize
        payload = fh.read(expected)
        if len(payload) < expected:
            raise TensorFormatError(
                f"{path}: truncated payload ({len(payload)} of {expected} bytes)"
            )
        if fh.read(1):
            logger.warning("Trailing bytes after tensor payload in %s", path)

    array = np.frombuffer(payload, dtype=dtype, count=count).reshape(shape)
    return array.astype(dtype.newbyteorder("="), copy=True)


def save_tensor(array: np.ndarray, path: Union[str, Path]) -> None:
    """Write a tensor as little-endian .npy version 1.0."""
    check_tensor(np.asarray(array))
    little = np.ascontiguousarray(array, dtype=array.dtype.newbyteorder("<"))

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        npy_format.write_array(fh, little, version=(1, 0), allow_pickle=False)
