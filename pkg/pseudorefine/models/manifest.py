"""
Manifest Model

A manifest is an ordered list of per-image records naming the artifacts each
pipeline stage reads. Every path is optional; a stage checks for the keys it
needs before it runs.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

from ..validation.input_validation import MissingInputError, ValidationError

RECORD_KEYS = ("image", "probmap", "masks", "features", "labels")


@dataclass(frozen=True)
class ManifestRecord:
    """One image and its per-stage artifact paths."""

    record_id: str
    index: int
    paths: Dict[str, Path] = field(default_factory=dict)

    def get(self, key: str) -> Optional[Path]:
        return self.paths.get(key)

    def require(self, *keys: str) -> Dict[str, Path]:
        """Return the requested paths, listing every missing or absent one."""
        missing = []
        for key in keys:
            path = self.paths.get(key)
            if path is None:
                missing.append(f"{key} (not in manifest)")
            elif not path.is_file():
                missing.append(f"{key} ({path})")
        if missing:
            raise MissingInputError(
                f"Record '{self.record_id}' is missing inputs: {', '.join(missing)}",
                missing,
            )
        return {key: self.paths[key] for key in keys}


@dataclass(frozen=True)
class Manifest:
    """Ordered collection of manifest records."""

    records: List[ManifestRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ManifestRecord]:
        return iter(self.records)

    @classmethod
    def from_entries(cls, entries: List[Dict[str, Any]], base_dir: Path) -> "Manifest":
        """Build a manifest from decoded JSON entries, resolving relative paths."""
        if not isinstance(entries, list):
            raise ValidationError("Manifest must be a JSON array of records")

        records = []
        seen = set()
        for index, entry in enumerate(entries):
            if not isinstance(entry, dict):
                raise ValidationError(f"Manifest record {index} is not an object")
            unknown = set(entry) - set(RECORD_KEYS) - {"id"}
            if unknown:
                raise ValidationError(
                    f"Manifest record {index} has unknown keys: {sorted(unknown)}"
                )

            paths = {}
            for key in RECORD_KEYS:
                value = entry.get(key)
                if value:
                    path = Path(value)
                    paths[key] = path if path.is_absolute() else base_dir / path

            record_id = entry.get("id") or _default_id(paths, index)
            if record_id in seen:
                raise ValidationError(f"Duplicate manifest record id: {record_id}")
            seen.add(record_id)
            records.append(ManifestRecord(str(record_id), index, paths))

        return cls(records)


def _default_id(paths: Dict[str, Path], index: int) -> str:
    for key in RECORD_KEYS:
        if key in paths:
            return paths[key].stem
    return f"record_{index:05d}"
