"""Users, binary favourites, consistency-test trials, and reliability scoring.

File formats (UTF-8 CSV with header rows, booleans as ``true``/``false``):

* users:      ``user_id,source,age_range,gender,country``
* favourites: ``user_id,kind,target_id``
* trials:     ``user_id,kind,target_id,is_true_favourite,selected``

Demographics fields may be empty; an empty value means "unspecified".
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Mapping

from .catalog import AttributeType, Catalog
from .errors import DataFormatError, IntegrityError, NotFoundError

UNSPECIFIED = "unspecified"


class Source(str, Enum):
    VOLUNTEER = "volunteer"
    CROWDSOURCED = "crowdsourced"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"
    UNSPECIFIED = UNSPECIFIED

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


class FavouriteKind(str, Enum):
    ITEM = "item"
    FEATURE = "feature"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class User:
    user_id: str
    source: Source
    age_range: str = UNSPECIFIED
    gender: Gender = Gender.UNSPECIFIED
    country: str = UNSPECIFIED


@dataclass(frozen=True, order=True)
class Favourite:
    """One binary positive selection; favourites form a set, never a multiset."""

    user_id: str
    kind: FavouriteKind
    target_id: str


@dataclass(frozen=True, order=True)
class ConsistencyTrial:
    """One element shown during the re-selection test and the user's response."""

    user_id: str
    kind: FavouriteKind
    target_id: str
    is_true_favourite: bool
    selected: bool


DEFAULT_MINIMUMS: Mapping[str, int] = {
    "item": 5,
    AttributeType.GENRE.value: 2,
    AttributeType.ACTOR.value: 3,
    AttributeType.DIRECTOR.value: 1,
}


@dataclass(frozen=True)
class ReliabilityPolicy:
    """Thresholds deciding which participants count as reliable.

    Volunteers are reliable when their favourite counts meet every minimum;
    crowdsourced users when their consistency-test precision is defined and
    at least ``precision_threshold`` (inclusive).
    """

    precision_threshold: float = 0.5
    minimums: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_MINIMUMS))

    def __post_init__(self) -> None:
        if not 0.0 <= self.precision_threshold <= 1.0:
            raise ValueError("precision_threshold must be in [0, 1]")
        if any(count < 0 for count in self.minimums.values()):
            raise ValueError("minimum counts must be >= 0")


@dataclass
class Dataset:
    """Immutable collection of users, favourites, and trials.

    ``feature_types`` maps favourited feature ids to their catalog attribute
    type; features absent from the paired catalog have no entry and cannot be
    classified.  ``unresolved_items`` holds favourited item ids missing from
    the catalog; the selections are kept but skipped during profiling.
    """

    users: dict[str, User] = field(default_factory=dict)
    favourites: tuple[Favourite, ...] = ()
    trials: tuple[ConsistencyTrial, ...] = ()
    provenance: dict[str, str] = field(default_factory=dict)
    feature_types: dict[str, AttributeType] = field(default_factory=dict)
    unresolved_items: frozenset[str] = frozenset()
    duplicate_favourites: int = 0

    @cached_property
    def favourites_by_user(self) -> dict[str, tuple[Favourite, ...]]:
        grouped: dict[str, list[Favourite]] = {u: [] for u in self.users}
        for favourite in self.favourites:
            grouped[favourite.user_id].append(favourite)
        return {u: tuple(favs) for u, favs in grouped.items()}

    @cached_property
    def trials_by_user(self) -> dict[str, tuple[ConsistencyTrial, ...]]:
        grouped: dict[str, list[ConsistencyTrial]] = {u: [] for u in self.users}
        for trial in self.trials:
            grouped[trial.user_id].append(trial)
        return {u: tuple(rows) for u, rows in grouped.items()}

    def require_user(self, user_id: str) -> User:
        try:
            return self.users[user_id]
        except KeyError:
            raise NotFoundError(f"unknown user: {user_id!r}") from None

    def item_favourites(self, user_id: str, resolved_only: bool = False) -> list[str]:
        self.require_user(user_id)
        targets = [
            f.target_id
            for f in self.favourites_by_user[user_id]
            if f.kind is FavouriteKind.ITEM
        ]
        if resolved_only:
            targets = [t for t in targets if t not in self.unresolved_items]
        return targets

    def feature_favourites(
        self, user_id: str, attribute_type: AttributeType | None = None
    ) -> list[str]:
        self.require_user(user_id)
        targets = [
            f.target_id
            for f in self.favourites_by_user[user_id]
            if f.kind is FavouriteKind.FEATURE
        ]
        if attribute_type is not None:
            targets = [t for t in targets if self.feature_types.get(t) is attribute_type]
        return targets


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _parse_bool(raw: str, path: Path, line: int, fieldname: str) -> bool:
    value = raw.strip().lower()
    if value == "true":
        return True
    if value == "false":
        return False
    raise DataFormatError(f"{path}:{line}: field {fieldname!r}: expected true/false, got {raw!r}")


def _read_rows(path: Path, columns: tuple[str, ...]):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataFormatError(f"{path}: empty file")
        missing = [c for c in columns if c not in reader.fieldnames]
        if missing:
            raise DataFormatError(f"{path}: missing columns: {', '.join(missing)}")
        for row in reader:
            yield reader.line_num, row


def load_interactions(
    users_path: str | Path,
    favourites_path: str | Path,
    trials_path: str | Path | None = None,
    catalog: Catalog | None = None,
) -> Dataset:
    """Load and validate the interaction files into a :class:`Dataset`.

    Duplicate favourite rows collapse to one with a warning count.  Rows
    referencing unknown users raise :class:`IntegrityError`.  When a catalog
    is supplied, item favourites are resolved against it and feature
    favourites are annotated with their attribute type.
    """
    users_path = Path(users_path)
    favourites_path = Path(favourites_path)
    trials_path = Path(trials_path) if trials_path is not None else None

    users: dict[str, User] = {}
    for line, row in _read_rows(users_path, ("user_id", "source", "age_range", "gender", "country")):
        user_id = (row.get("user_id") or "").strip()
        if not user_id:
            raise DataFormatError(f"{users_path}:{line}: field 'user_id': empty")
        if user_id in users:
            raise IntegrityError(f"{users_path}:{line}: duplicate user_id {user_id!r}")
        try:
            source = Source((row.get("source") or "").strip())
        except ValueError:
            raise DataFormatError(
                f"{users_path}:{line}: field 'source': got {row.get('source')!r}"
            ) from None
        gender_raw = (row.get("gender") or "").strip() or UNSPECIFIED
        try:
            gender = Gender(gender_raw)
        except ValueError:
            raise DataFormatError(
                f"{users_path}:{line}: field 'gender': got {gender_raw!r}"
            ) from None
        users[user_id] = User(
            user_id=user_id,
            source=source,
            age_range=(row.get("age_range") or "").strip() or UNSPECIFIED,
            gender=gender,
            country=(row.get("country") or "").strip() or UNSPECIFIED,
        )

    favourites: set[Favourite] = set()
    duplicates = 0
    for line, row in _read_rows(favourites_path, ("user_id", "kind", "target_id")):
        user_id = (row.get("user_id") or "").strip()
        target_id = (row.get("target_id") or "").strip()
        if user_id not in users:
            raise IntegrityError(f"{favourites_path}:{line}: unknown user {user_id!r}")
        if not target_id:
            raise DataFormatError(f"{favourites_path}:{line}: field 'target_id': empty")
        try:
            kind = FavouriteKind((row.get("kind") or "").strip())
        except ValueError:
            raise DataFormatError(
                f"{favourites_path}:{line}: field 'kind': got {row.get('kind')!r}"
            ) from None
        favourite = Favourite(user_id, kind, target_id)
        if favourite in favourites:
            duplicates += 1
        else:
            favourites.add(favourite)

    trials: list[ConsistencyTrial] = []
    seen_trials: set[tuple[str, FavouriteKind, str]] = set()
    if trials_path is not None:
        trial_columns = ("user_id", "kind", "target_id", "is_true_favourite", "selected")
        for line, row in _read_rows(trials_path, trial_columns):
            user_id = (row.get("user_id") or "").strip()
            if user_id not in users:
                raise IntegrityError(f"{trials_path}:{line}: unknown user {user_id!r}")
            try:
                kind = FavouriteKind((row.get("kind") or "").strip())
            except ValueError:
                raise DataFormatError(
                    f"{trials_path}:{line}: field 'kind': got {row.get('kind')!r}"
                ) from None
            target_id = (row.get("target_id") or "").strip()
            key = (user_id, kind, target_id)
            if key in seen_trials:
                raise IntegrityError(
                    f"{trials_path}:{line}: duplicate trial for {user_id!r}/{target_id!r}"
                )
            seen_trials.add(key)
            trials.append(
                ConsistencyTrial(
                    user_id=user_id,
                    kind=kind,
                    target_id=target_id,
                    is_true_favourite=_parse_bool(
                        row.get("is_true_favourite") or "", trials_path, line, "is_true_favourite"
                    ),
                    selected=_parse_bool(row.get("selected") or "", trials_path, line, "selected"),
                )
            )

    provenance = {users_path.name: _sha256(users_path), favourites_path.name: _sha256(favourites_path)}
    if trials_path is not None:
        provenance[trials_path.name] = _sha256(trials_path)

    feature_types: dict[str, AttributeType] = {}
    unresolved: set[str] = set()
    if catalog is not None:
        for favourite in favourites:
            if favourite.kind is FavouriteKind.ITEM:
                if favourite.target_id not in catalog.items:
                    unresolved.add(favourite.target_id)
            else:
                feature = catalog.features.get(favourite.target_id)
                if feature is not None:
                    feature_types[favourite.target_id] = feature.attribute_type

    return Dataset(
        users=users,
        favourites=tuple(sorted(favourites)),
        trials=tuple(sorted(trials)),
        provenance=provenance,
        feature_types=feature_types,
        unresolved_items=frozenset(unresolved),
        duplicate_favourites=duplicates,
    )


def minimum_favourites_met(user_id: str, dataset: Dataset, policy: ReliabilityPolicy) -> bool:
    """True iff the user's favourite counts meet every policy minimum.

    Item favourites count whether or not they resolve in the catalog (the
    selection happened either way); feature favourites whose type is unknown
    count toward no per-type minimum.
    """
    dataset.require_user(user_id)
    counts: dict[str, int] = {}
    for favourite in dataset.favourites_by_user[user_id]:
        if favourite.kind is FavouriteKind.ITEM:
            counts["item"] = counts.get("item", 0) + 1
        else:
            attribute_type = dataset.feature_types.get(favourite.target_id)
            if attribute_type is not None:
                key = attribute_type.value
                counts[key] = counts.get(key, 0) + 1
    return all(counts.get(key, 0) >= minimum for key, minimum in policy.minimums.items())


def precision_of_trials(trials: tuple[ConsistencyTrial, ...] | list[ConsistencyTrial]) -> float | None:
    """Precision over one trial sheet: true selections / all selections.

    ``None`` (undefined, distinct from 0) when nothing was selected.
    """
    selected = [t for t in trials if t.selected]
    if not selected:
        return None
    correct = sum(1 for t in selected if t.is_true_favourite)
    return correct / len(selected)


def consistency_precision(user_id: str, dataset: Dataset) -> float | None:
    """Precision of the user's re-selection test, or ``None`` if undefined."""
    dataset.require_user(user_id)
    return precision_of_trials(dataset.trials_by_user[user_id])


def is_reliable(user_id: str, dataset: Dataset, policy: ReliabilityPolicy) -> bool:
    """Apply the reliability rule for the user's source.

    Crowdsourced users without a defined precision are unreliable
    (fail-closed): the test is the only reliability signal for that group.
    """
    user = dataset.require_user(user_id)
    if user.source is Source.VOLUNTEER:
        return minimum_favourites_met(user_id, dataset, policy)
    precision = consistency_precision(user_id, dataset)
    return precision is not None and precision >= policy.precision_threshold


def filter_reliable(dataset: Dataset, policy: ReliabilityPolicy) -> Dataset:
    """Restrict the dataset to reliable users and their favourites/trials."""
    keep = {u for u in dataset.users if is_reliable(u, dataset, policy)}
    return replace(
        dataset,
        users={u: dataset.users[u] for u in sorted(keep)},
        favourites=tuple(f for f in dataset.favourites if f.user_id in keep),
        trials=tuple(t for t in dataset.trials if t.user_id in keep),
    )


@dataclass(frozen=True)
class DatasetSummary:
    """Descriptive counts over one dataset (see :func:`summary_stats`)."""

    users_total: int
    users_by_source: dict[str, int]
    users_by_gender: dict[str, int]
    users_by_age_range: dict[str, int]
    users_by_country: dict[str, int]
    reliable_users: int
    favourites_total: int
    favourites_unique: int
    item_favourites: int
    feature_favourites_by_type: dict[str, int]
    unresolved_item_favourites: int


def summary_stats(
    dataset: Dataset, policy: ReliabilityPolicy | None = None
) -> DatasetSummary:
    """Compute the dataset characteristics table for ``dataset``.

    Counts are additive over disjoint user partitions.  Feature favourites
    that cannot be typed against the catalog are reported under ``unknown``.
    """
    policy = policy or ReliabilityPolicy()
    by_source: dict[str, int] = {}
    by_gender: dict[str, int] = {}
    by_age: dict[str, int] = {}
    by_country: dict[str, int] = {}
    for user in dataset.users.values():
        by_source[user.source.value] = by_source.get(user.source.value, 0) + 1
        by_gender[user.gender.value] = by_gender.get(user.gender.value, 0) + 1
        by_age[user.age_range] = by_age.get(user.age_range, 0) + 1
        by_country[user.country] = by_country.get(user.country, 0) + 1

    item_count = 0
    unresolved_count = 0
    by_type: dict[str, int] = {}
    for favourite in dataset.favourites:
        if favourite.kind is FavouriteKind.ITEM:
            item_count += 1
            if favourite.target_id in dataset.unresolved_items:
                unresolved_count += 1
        else:
            attribute_type = dataset.feature_types.get(favourite.target_id)
            key = attribute_type.value if attribute_type is not None else "unknown"
            by_type[key] = by_type.get(key, 0) + 1

    unique_targets = {(f.kind, f.target_id) for f in dataset.favourites}
    return DatasetSummary(
        users_total=len(dataset.users),
        users_by_source=dict(sorted(by_source.items())),
        users_by_gender=dict(sorted(by_gender.items())),
        users_by_age_range=dict(sorted(by_age.items())),
        users_by_country=dict(sorted(by_country.items())),
        reliable_users=sum(1 for u in dataset.users if is_reliable(u, dataset, policy)),
        favourites_total=len(dataset.favourites),
        favourites_unique=len(unique_targets),
        item_favourites=item_count,
        feature_favourites_by_type=dict(sorted(by_type.items())),
        unresolved_item_favourites=unresolved_count,
    )
