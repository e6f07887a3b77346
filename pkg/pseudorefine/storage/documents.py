"""
JSON / CSV Documents

Mask-set and prompt files, the image manifest, and the deterministic
JSON/CSV writers every stage uses for its summaries.
"""

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

from ..models.manifest import Manifest
from ..models.masks import BinaryMask, MaskSet
from ..superpixel.prompts import PointPromptSet
from ..validation.input_validation import ValidationError, validate_file_path
from ..utils.logging import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


def read_json(path: PathLike) -> Any:
    path = validate_file_path(path, "JSON document")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON in {path}: {e}") from e


def write_json(data: Any, path: PathLike) -> Path:
    """Write sorted, indented JSON with a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_csv(rows: Iterable[Sequence[Any]], header: Sequence[str], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path


def load_mask_set(path: PathLike) -> MaskSet:
    """Parse {"height", "width", "masks": [{"runs", "area"}]} keeping mask order."""
    data = read_json(path)
    try:
        height, width = int(data["height"]), int(data["width"])
        masks = [
            BinaryMask(height, width, tuple(entry["runs"]), int(entry["area"]))
            for entry in data["masks"]
        ]
    except (KeyError, TypeError) as e:
        raise ValidationError(f"Malformed mask set {path}: {e}") from e
    return MaskSet(height, width, masks)


def save_mask_set(masks: MaskSet, path: PathLike) -> Path:
    return write_json(
        {
            "height": masks.height,
            "width": masks.width,
            "masks": [{"runs": list(m.runs), "area": m.area} for m in masks.masks],
        },
        path,
    )


def save_prompts(prompts: PointPromptSet, path: PathLike) -> Path:
    return write_json(
        [
            {"x": x, "y": y, "region": region}
            for (x, y), region in zip(prompts.points, prompts.source_region)
        ],
        path,
    )


def load_prompts(path: PathLike) -> PointPromptSet:
    entries = read_json(path)
    if not isinstance(entries, list):
        raise ValidationError(f"Prompt file {path} must hold a JSON array")
    try:
        points = tuple((float(e["x"]), float(e["y"])) for e in entries)
        regions = tuple(int(e["region"]) for e in entries)
    except (KeyError, TypeError) as e:
        raise ValidationError(f"Malformed prompt file {path}: {e}") from e
    return PointPromptSet(points, regions)


def load_manifest(path: PathLike) -> Manifest:
    """Read a JSON array of records; relative paths resolve against its directory."""
    path = validate_file_path(path, "manifest")
    manifest = Manifest.from_entries(read_json(path), path.resolve().parent)
    logger.debug("Loaded manifest %s with %d records", path, len(manifest))
    return manifest

