"""Shared builders and fixtures for the test suite."""

from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path

import pytest

from profilebench.catalog import AttributeType, Catalog, Feature, Item
from profilebench.interactions import Dataset, Favourite, FavouriteKind, Gender, Source, User

from .oracle import MicroInstance

TYPE_MAP = {"genre": AttributeType.GENRE, "actor": AttributeType.ACTOR}


def make_catalog(
    item_features: dict[str, list[str] | frozenset[str]],
    feature_types: dict[str, AttributeType],
    labels: dict[str, str] | None = None,
    titles: dict[str, str] | None = None,
) -> Catalog:
    labels = labels or {}
    titles = titles or {}
    features = {
        f: Feature(f, t, labels.get(f, f"Label {f}")) for f, t in feature_types.items()
    }
    items = {
        i: Item(i, titles.get(i, f"Title {i}"), frozenset(feats))
        for i, feats in item_features.items()
    }
    doc_freq = Counter(f for item in items.values() for f in item.features)
    return Catalog(items=items, features=features, doc_freq=dict(doc_freq))


def make_dataset(
    users: list[User],
    item_favs: dict[str, list[str]] | None = None,
    feature_favs: dict[str, list[str]] | None = None,
    catalog: Catalog | None = None,
    trials=(),
) -> Dataset:
    item_favs = item_favs or {}
    feature_favs = feature_favs or {}
    favourites = set()
    for user_id, targets in item_favs.items():
        for target in targets:
            favourites.add(Favourite(user_id, FavouriteKind.ITEM, target))
    for user_id, targets in feature_favs.items():
        for target in targets:
            favourites.add(Favourite(user_id, FavouriteKind.FEATURE, target))
    feature_types: dict[str, AttributeType] = {}
    unresolved: set[str] = set()
    if catalog is not None:
        for favourite in favourites:
            if favourite.kind is FavouriteKind.ITEM:
                if favourite.target_id not in catalog.items:
                    unresolved.add(favourite.target_id)
            elif favourite.target_id in catalog.features:
                feature_types[favourite.target_id] = catalog.features[
                    favourite.target_id
                ].attribute_type
    return Dataset(
        users={u.user_id: u for u in users},
        favourites=tuple(sorted(favourites)),
        trials=tuple(sorted(trials)),
        feature_types=feature_types,
        unresolved_items=frozenset(unresolved),
    )


def instance_objects(inst: MicroInstance) -> tuple[Catalog, Dataset]:
    """Convert a generated micro-instance into real catalog/dataset objects."""
    catalog = make_catalog(
        {i: feats for i, feats in inst.item_features.items()},
        {f: TYPE_MAP[t] for f, t in inst.feature_type.items()},
    )
    genders = [Gender.MALE, Gender.FEMALE, Gender.UNSPECIFIED]
    users = [
        User(u, Source.VOLUNTEER, gender=genders[idx % 3])
        for idx, u in enumerate(inst.user_ids)
    ]
    dataset = make_dataset(
        users,
        item_favs={u: list(inst.rated[u]) for u in inst.user_ids},
        feature_favs={u: sorted(inst.explicit[u]) for u in inst.user_ids},
        catalog=catalog,
    )
    return catalog, dataset


def write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


MINI_CATALOG_ROWS = [
    # item_id, title, genres, actors, directors
    ("m1", "First Strike", ["g1:Action"], ["a1:Alan Holt", "a2:Bea Ruiz"], ["d1:Ada Lord"]),
    ("m2", "Long Echo", ["g1:Action", "g2:Drama"], ["a1:Alan Holt", "a3:Cy Monroe"], ["d1:Ada Lord"]),
    ("m3", "Quiet Rooms", ["g2:Drama"], ["a2:Bea Ruiz", "a3:Cy Monroe"], ["d2:Ben Crane"]),
    ("m4", "Wry Wit", ["g1:Action", "g3:Comedy"], ["a4:Dot Vance"], ["d2:Ben Crane"]),
    ("m5", "Third Laugh", ["g3:Comedy"], ["a1:Alan Holt", "a4:Dot Vance"], ["d1:Ada Lord"]),
    ("m6", "Dark Hall", ["g4:Horror"], ["a2:Bea Ruiz"], ["d2:Ben Crane"]),
    ("m7", "Stage Door", ["g2:Drama", "g3:Comedy"], ["a3:Cy Monroe"], ["d1:Ada Lord"]),
    ("m8", "Second Strike", ["g1:Action"], ["a1:Alan Holt"], ["d2:Ben Crane"]),
]


def write_mini_catalog(path: Path) -> None:
    header = ["item_id", "title"] + [t.value for t in AttributeType]
    rows = []
    for item_id, title, genres, actors, directors in MINI_CATALOG_ROWS:
        cells = {t.value: "" for t in AttributeType}
        cells["genre"] = "|".join(genres)
        cells["actor"] = "|".join(actors)
        cells["director"] = "|".join(directors)
        rows.append([item_id, title] + [cells[t.value] for t in AttributeType])
    write_csv(path, header, rows)


def write_mini_interactions(directory: Path) -> dict[str, Path]:
    users = directory / "users.csv"
    favourites = directory / "favourites.csv"
    trials = directory / "trials.csv"
    write_csv(
        users,
        ["user_id", "source", "age_range", "gender", "country"],
        [
            ["v1", "volunteer", "25-34", "male", "IT"],
            ["v2", "volunteer", "18-24", "female", "US"],
            ["c1", "crowdsourced", "25-34", "male", "IN"],
            ["c2", "crowdsourced", "35-44", "female", "US"],
            ["c3", "crowdsourced", "", "", ""],
        ],
    )
    fav_rows = [
        ["v1", "item", "m1"],
        ["v1", "item", "m1"],  # duplicate row, collapses with a warning
        ["v1", "item", "m2"],
        ["v1", "item", "m3"],
        ["v1", "item", "m4"],
        ["v1", "item", "m5"],
        ["v1", "item", "mX"],  # not in catalog: kept but unresolved
        ["v1", "feature", "g1"],
        ["v1", "feature", "g2"],
        ["v1", "feature", "a1"],
        ["v1", "feature", "a2"],
        ["v1", "feature", "a3"],
        ["v1", "feature", "d1"],
        ["v1", "feature", "gX"],  # not in catalog: unknown type
        ["v2", "item", "m1"],
        ["v2", "feature", "g1"],
        ["c1", "item", "m2"],
        ["c1", "item", "m3"],
        ["c1", "feature", "g2"],
        ["c1", "feature", "g3"],
        ["c1", "feature", "a2"],
        ["c2", "item", "m4"],
        ["c2", "feature", "g3"],
        ["c3", "item", "m6"],
        ["c3", "feature", "g4"],
    ]
    write_csv(favourites, ["user_id", "kind", "target_id"], fav_rows)
    trial_rows = [
        ["c1", "item", "m2", "true", "true"],
        ["c1", "item", "m6", "false", "false"],
        ["c1", "feature", "g2", "true", "true"],
        ["c1", "feature", "a2", "true", "true"],
        ["c2", "item", "m4", "true", "true"],
        ["c2", "item", "m7", "false", "true"],
        ["c2", "feature", "g3", "true", "false"],
        ["c2", "feature", "g1", "false", "true"],
    ]
    write_csv(
        trials,
        ["user_id", "kind", "target_id", "is_true_favourite", "selected"],
        trial_rows,
    )
    return {"users": users, "favourites": favourites, "trials": trials}


@pytest.fixture(scope="session")
def mini_files(tmp_path_factory) -> dict[str, Path]:
    """Small end-to-end dataset: 5 users, 2 of them reliable (v1, c1)."""
    directory = tmp_path_factory.mktemp("mini")
    catalog = directory / "catalog.csv"
    write_mini_catalog(catalog)
    paths = write_mini_interactions(directory)
    paths["catalog"] = catalog
    paths["dir"] = directory
    return paths
