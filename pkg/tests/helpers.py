"""File builders for pipeline tests."""

import json
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
from PIL import Image

from pseudorefine.storage.tensor_io import save_tensor


def write_manifest(path: Path, records: List[Dict[str, Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(records), encoding="utf-8")
    return path


def write_rgb(path: Path, pixels: np.ndarray) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(pixels, dtype=np.uint8)).save(path)
    return path


def write_labels(path: Path, labels) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(labels, dtype=np.uint8)).save(path)
    return path


def write_tensor(path: Path, array) -> Path:
    save_tensor(np.asarray(array), path)
    return path


def write_masks(path: Path, height: int, width: int, masks: List[Dict[str, Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps({"height": height, "width": width, "masks": masks}), encoding="utf-8"
    )
    return path


def random_probmap(rng, height: int, width: int, classes: int, peak: float = 8.0) -> np.ndarray:
    """Softmax of random logits; a large peak makes many pixels confident."""
    logits = rng.normal(size=(height, width, classes)) * peak
    logits -= logits.max(axis=2, keepdims=True)
    probs = np.exp(logits)
    return probs / probs.sum(axis=2, keepdims=True)
