"""Item/feature catalog: loading, indexing, and frequency/search queries.

The catalog file is a UTF-8 CSV with a header row.  Each record is one item
with fields ``item_id``, ``title``, and one list-valued column per attribute
type.  List cells hold ``feature_id:label`` pairs separated by ``|`` (feature
ids therefore must not contain ``:`` or ``|``; labels must not contain ``|``).
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import DataFormatError, IntegrityError, NotFoundError


class AttributeType(str, Enum):
    """Closed set of item feature categories."""

    GENRE = "genre"
    ACTOR = "actor"
    DIRECTOR = "director"
    PRODUCTION_COMPANY = "production_company"
    PRODUCTION_COUNTRY = "production_country"
    PRODUCER = "producer"
    SCREENWRITER = "screenwriter"
    RELEASE_YEAR = "release_year"
    SOUND_CREW = "sound_crew"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


CATALOG_COLUMNS: tuple[str, ...] = ("item_id", "title") + tuple(t.value for t in AttributeType)


@dataclass(frozen=True)
class Feature:
    """One typed content feature (a genre, a person, a year, ...)."""

    feature_id: str
    attribute_type: AttributeType
    label: str


@dataclass(frozen=True)
class Item:
    """One catalog item with its deduplicated feature set."""

    item_id: str
    title: str
    features: frozenset[str]


@dataclass
class Catalog:
    """Immutable item/feature index with per-feature document frequencies.

    ``doc_freq[f]`` is the number of items whose feature set contains ``f``;
    it is recomputed on load, so it is at least 1 for every stored feature.
    The catalog is never mutated after loading and is safe for concurrent
    reads.
    """

    items: dict[str, Item] = field(default_factory=dict)
    features: dict[str, Feature] = field(default_factory=dict)
    doc_freq: dict[str, int] = field(default_factory=dict)

    def document_frequency(self, feature_id: str) -> int:
        """Number of items carrying ``feature_id``; raises if unknown."""
        try:
            return self.doc_freq[feature_id]
        except KeyError:
            raise NotFoundError(f"unknown feature: {feature_id!r}") from None

    def features_of_type(self, attribute_type: AttributeType) -> list[Feature]:
        return [f for f in self.features.values() if f.attribute_type is attribute_type]

    def search_features(
        self, attribute_type: AttributeType, query: str, limit: int = 10
    ) -> list[Feature]:
        """Case-insensitive substring search on labels within one type.

        Results are ordered by document frequency descending, then feature id
        ascending; an empty query matches everything.
        """
        if limit < 1:
            raise ValueError("limit must be >= 1")
        needle = query.lower()
        hits = [
            f
            for f in self.features.values()
            if f.attribute_type is attribute_type and needle in f.label.lower()
        ]
        hits.sort(key=lambda f: (-self.doc_freq[f.feature_id], f.feature_id))
        return hits[:limit]

    def popular_features(self, attribute_type: AttributeType, n: int) -> list[Feature]:
        """Top ``n`` features of a type by document frequency (ties by id)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        return self.search_features(attribute_type, "", n)

    def search_items(self, query: str, limit: int = 10) -> list[Item]:
        """Case-insensitive substring search on titles.

        Ordered by feature-set size descending (a proxy for production scale,
        since the catalog carries no numeric popularity metadata), then item
        id ascending.
        """
        if limit < 1:
            raise ValueError("limit must be >= 1")
        needle = query.lower()
        hits = [i for i in self.items.values() if needle in i.title.lower()]
        hits.sort(key=lambda i: (-len(i.features), i.item_id))
        return hits[:limit]

    def popular_items(self, n: int) -> list[Item]:
        if n < 1:
            raise ValueError("n must be >= 1")
        return self.search_items("", n)


def _parse_feature_cell(
    cell: str, attribute_type: AttributeType, path: Path, line: int
) -> list[tuple[str, str]]:
    pairs = []
    for token in cell.split("|"):
        token = token.strip()
        if not token:
            continue
        feature_id, sep, label = token.partition(":")
        feature_id = feature_id.strip()
        label = label.strip()
        if not sep or not feature_id or not label:
            raise DataFormatError(
                f"{path}:{line}: field {attribute_type.value!r}: "
                f"expected 'feature_id:label', got {token!r}"
            )
        pairs.append((feature_id, label))
    return pairs


def load_catalog(path: str | Path) -> Catalog:
    """Load and validate a catalog file.

    Loading is deterministic and row-order insensitive: the same records in
    any order produce an equal :class:`Catalog`.  Conflicting feature
    definitions (one id with two labels or types, or one ``(type, label)``
    pair under two ids) raise :class:`IntegrityError`.
    """
    path = Path(path)
    catalog = Catalog()
    by_type_label: dict[tuple[AttributeType, str], str] = {}
    doc_freq: Counter[str] = Counter()

    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise DataFormatError(f"{path}: empty catalog")
        missing = [c for c in CATALOG_COLUMNS if c not in header]
        if missing:
            raise DataFormatError(f"{path}: missing columns: {', '.join(missing)}")
        for row in reader:
            line = reader.line_num
            item_id = (row.get("item_id") or "").strip()
            title = (row.get("title") or "").strip()
            if not item_id:
                raise DataFormatError(f"{path}:{line}: field 'item_id': empty")
            if not title:
                raise DataFormatError(f"{path}:{line}: field 'title': empty")
            if item_id in catalog.items:
                raise IntegrityError(f"{path}:{line}: duplicate item_id {item_id!r}")
            item_features: set[str] = set()
            for attribute_type in AttributeType:
                cell = row.get(attribute_type.value) or ""
                for feature_id, label in _parse_feature_cell(cell, attribute_type, path, line):
                    known = catalog.features.get(feature_id)
                    if known is not None:
                        if known.attribute_type is not attribute_type or known.label != label:
                            raise IntegrityError(
                                f"{path}:{line}: feature {feature_id!r} redefined as "
                                f"({attribute_type.value}, {label!r}); previously "
                                f"({known.attribute_type.value}, {known.label!r})"
                            )
                    else:
                        owner = by_type_label.get((attribute_type, label))
                        if owner is not None:
                            raise IntegrityError(
                                f"{path}:{line}: label {label!r} of type "
                                f"{attribute_type.value!r} already used by feature {owner!r}"
                            )
                        catalog.features[feature_id] = Feature(feature_id, attribute_type, label)
                        by_type_label[(attribute_type, label)] = feature_id
                    item_features.add(feature_id)
            catalog.items[item_id] = Item(item_id, title, frozenset(item_features))
            doc_freq.update(item_features)

    if not catalog.items:
        raise DataFormatError(f"{path}: empty catalog")
    catalog.doc_freq = dict(doc_freq)
    return catalog


def document_frequency(catalog: Catalog, feature_id: str) -> int:
    return catalog.document_frequency(feature_id)


def search_features(
    catalog: Catalog, attribute_type: AttributeType, query: str, limit: int = 10
) -> list[Feature]:
    return catalog.search_features(attribute_type, query, limit)


def popular_features(catalog: Catalog, attribute_type: AttributeType, n: int) -> list[Feature]:
    return catalog.popular_features(attribute_type, n)


def write_catalog(catalog: Catalog, path: str | Path) -> None:
    """Write a catalog back to the documented CSV format (rows sorted by id)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CATALOG_COLUMNS)
        for item_id in sorted(catalog.items):
            item = catalog.items[item_id]
            cells = {t: [] for t in AttributeType}
            for feature_id in sorted(item.features):
                feature = catalog.features[feature_id]
                cells[feature.attribute_type].append(f"{feature.feature_id}:{feature.label}")
            writer.writerow(
                [item.item_id, item.title] + ["|".join(cells[t]) for t in AttributeType]
            )
