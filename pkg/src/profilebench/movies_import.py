"""Converter from a "The Movies Dataset"-style export to the catalog format.

Expects the two CSV files of that export family:

* a metadata file with columns ``id``, ``title``, ``genres``,
  ``production_companies``, ``production_countries``, ``release_date``
* an optional credits file with columns ``id``, ``cast``, ``crew``

The list-valued cells hold Python-literal lists of dicts, which is how that
export serialises nested TMDb records.  Unusable rows (missing id or title,
unparsable cells) are skipped and counted rather than aborting the run.
"""

from __future__ import annotations

import ast
import csv
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import CATALOG_COLUMNS, AttributeType
from .errors import DataFormatError

# Cast cells of big ensemble movies exceed the default csv field limit.
csv.field_size_limit(16 * 1024 * 1024)

_PREFIX = {
    AttributeType.GENRE: "g",
    AttributeType.ACTOR: "a",
    AttributeType.DIRECTOR: "d",
    AttributeType.PRODUCTION_COMPANY: "pc",
    AttributeType.PRODUCTION_COUNTRY: "co",
    AttributeType.PRODUCER: "pr",
    AttributeType.SCREENWRITER: "sw",
    AttributeType.RELEASE_YEAR: "y",
    AttributeType.SOUND_CREW: "sn",
}

_CREW_JOBS = {
    "Director": AttributeType.DIRECTOR,
    "Producer": AttributeType.PRODUCER,
    "Screenplay": AttributeType.SCREENWRITER,
    "Writer": AttributeType.SCREENWRITER,
}


@dataclass
class ConversionStats:
    items_written: int = 0
    rows_skipped: int = 0
    duplicate_items: int = 0
    credits_unmatched: int = 0
    label_collisions: int = 0
    features_by_type: dict[str, int] = field(default_factory=dict)


class _FeatureRegistry:
    """Assigns stable feature ids and keeps (type, label) pairs unique."""

    def __init__(self) -> None:
        self.labels: dict[str, str] = {}
        self.by_type_label: dict[tuple[AttributeType, str], str] = {}
        self.collisions = 0

    def register(self, attribute_type: AttributeType, raw_id: str, label: str) -> str | None:
        label = _clean_label(label)
        if not raw_id or not label:
            return None
        feature_id = f"{_PREFIX[attribute_type]}{raw_id}"
        if feature_id in self.labels:
            return feature_id
        if (attribute_type, label) in self.by_type_label:
            # Same display name under a different source id (e.g. two people
            # sharing a name): keep both, disambiguated by the source id.
            label = f"{label} ({raw_id})"
            self.collisions += 1
        self.labels[feature_id] = label
        self.by_type_label[(attribute_type, label)] = feature_id
        return feature_id


def _clean_label(label: str) -> str:
    # The pair separator may not occur inside labels.
    return " ".join(str(label).replace("|", "/").split())


def _literal_list(cell: str | None) -> list[dict]:
    if not cell:
        return []
    try:
        value = ast.literal_eval(cell)
    except (ValueError, SyntaxError):
        return []
    if not isinstance(value, list):
        return []
    return [entry for entry in value if isinstance(entry, dict)]


def _read_export(path: Path, required: tuple[str, ...]):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataFormatError(f"{path}: empty file")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise DataFormatError(f"{path}: missing columns: {', '.join(missing)}")
        yield from reader


def convert_movies_export(
    movies_path: str | Path,
    out_path: str | Path,
    credits_path: str | Path | None = None,
) -> ConversionStats:
    """Convert the export into the catalog CSV format, returning run stats."""
    movies_path = Path(movies_path)
    out_path = Path(out_path)
    stats = ConversionStats()
    registry = _FeatureRegistry()

    credits: dict[str, dict] = {}
    if credits_path is not None:
        for row in _read_export(Path(credits_path), ("id", "cast", "crew")):
            movie_id = (row.get("id") or "").strip()
            if movie_id and movie_id not in credits:
                credits[movie_id] = row

    items: dict[str, tuple[str, list[str]]] = {}
    for row in _read_export(movies_path, ("id", "title", "genres")):
        movie_id = (row.get("id") or "").strip()
        title = " ".join((row.get("title") or "").split())
        if not movie_id or not movie_id.isdigit() or not title:
            stats.rows_skipped += 1
            continue
        if movie_id in items:
            stats.duplicate_items += 1
            continue

        features: set[str] = set()

        def add(attribute_type: AttributeType, raw_id, label) -> None:
            feature_id = registry.register(attribute_type, str(raw_id), label)
            if feature_id is not None:
                features.add(feature_id)

        for entry in _literal_list(row.get("genres")):
            add(AttributeType.GENRE, entry.get("id", ""), entry.get("name", ""))
        for entry in _literal_list(row.get("production_companies")):
            add(AttributeType.PRODUCTION_COMPANY, entry.get("id", ""), entry.get("name", ""))
        for entry in _literal_list(row.get("production_countries")):
            add(
                AttributeType.PRODUCTION_COUNTRY,
                entry.get("iso_3166_1", ""),
                entry.get("name", ""),
            )
        release_date = (row.get("release_date") or "").strip()
        if len(release_date) >= 4 and release_date[:4].isdigit():
            add(AttributeType.RELEASE_YEAR, release_date[:4], release_date[:4])

        credit_row = credits.get(movie_id)
        if credit_row is None:
            if credits_path is not None:
                stats.credits_unmatched += 1
        else:
            for entry in _literal_list(credit_row.get("cast")):
                add(AttributeType.ACTOR, entry.get("id", ""), entry.get("name", ""))
            for entry in _literal_list(credit_row.get("crew")):
                job_type = _CREW_JOBS.get(str(entry.get("job", "")))
                if job_type is not None:
                    add(job_type, entry.get("id", ""), entry.get("name", ""))
                elif str(entry.get("department", "")) == "Sound":
                    add(AttributeType.SOUND_CREW, entry.get("id", ""), entry.get("name", ""))

        items[movie_id] = (title, sorted(features))

    if not items:
        raise DataFormatError(f"{movies_path}: no usable rows")

    type_of = {fid: t for (t, _), fid in registry.by_type_label.items()}
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CATALOG_COLUMNS)
        for movie_id in sorted(items, key=lambda m: (len(m), m)):
            title, features = items[movie_id]
            cells: dict[AttributeType, list[str]] = {t: [] for t in AttributeType}
            for feature_id in features:
                attribute_type = type_of[feature_id]
                cells[attribute_type].append(f"{feature_id}:{registry.labels[feature_id]}")
            writer.writerow([movie_id, title] + ["|".join(cells[t]) for t in AttributeType])
            stats.items_written += 1

    for attribute_type in type_of.values():
        key = attribute_type.value
        stats.features_by_type[key] = stats.features_by_type.get(key, 0) + 1
    stats.label_collisions = registry.collisions
    return stats
