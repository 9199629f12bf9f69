"""Descriptive overlap analyses: explicit vs implicit feature popularity.

For a cohort of users and one attribute type, each feature gets two user
counts: how many cohort members picked it explicitly, and how many have at
least one rated item containing it.  Top-k rankings of the two counts are
then intersected to measure how far implicit exposure agrees with explicit
taste.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

from .catalog import AttributeType, Catalog
from .errors import EmptyCohortError
from .interactions import Dataset, Gender, ReliabilityPolicy, is_reliable

RankMode = Literal["explicit", "implicit"]


@dataclass(frozen=True)
class FeaturePopularity:
    """Per-feature user counts within one cohort and attribute type."""

    feature_id: str
    label: str
    r_exp: int
    r_imp: int


@dataclass(frozen=True)
class OverlapRow:
    """Intersection size of the explicit and implicit top-k rankings."""

    k: int
    common: int
    percentage: float


def group_cohort(
    dataset: Dataset,
    gender: Gender | None = None,
    reliable_only: bool = False,
    policy: ReliabilityPolicy | None = None,
) -> frozenset[str]:
    """User ids matching the gender filter (``None`` means any)."""
    policy = policy or ReliabilityPolicy()
    cohort = set()
    for user_id, user in dataset.users.items():
        if gender is not None and user.gender is not gender:
            continue
        if reliable_only and not is_reliable(user_id, dataset, policy):
            continue
        cohort.add(user_id)
    return frozenset(cohort)


def feature_popularity(
    dataset: Dataset,
    catalog: Catalog,
    attribute_type: AttributeType,
    cohort: Iterable[str],
) -> list[FeaturePopularity]:
    """Explicit and implicit user counts per feature over the cohort.

    Both counts are counts of distinct users, not of occurrences.  Features
    with neither count positive are omitted; rows are ordered by feature id.
    """
    cohort = frozenset(cohort)
    if not cohort:
        raise EmptyCohortError("cohort is empty")
    r_exp: dict[str, int] = {}
    r_imp: dict[str, int] = {}
    for user_id in sorted(cohort):
        dataset.require_user(user_id)
        for feature_id in set(dataset.feature_favourites(user_id, attribute_type)):
            r_exp[feature_id] = r_exp.get(feature_id, 0) + 1
        seen: set[str] = set()
        for item_id in dataset.item_favourites(user_id, resolved_only=True):
            for feature_id in catalog.items[item_id].features:
                if catalog.features[feature_id].attribute_type is attribute_type:
                    seen.add(feature_id)
        for feature_id in seen:
            r_imp[feature_id] = r_imp.get(feature_id, 0) + 1
    return [
        FeaturePopularity(
            feature_id=f,
            label=catalog.features[f].label,
            r_exp=r_exp.get(f, 0),
            r_imp=r_imp.get(f, 0),
        )
        for f in sorted(set(r_exp) | set(r_imp))
    ]


def top_k(
    popularity: list[FeaturePopularity], mode: RankMode, k: int
) -> list[FeaturePopularity]:
    """Top-k features by the chosen count (descending, ties by feature id).

    Features never selected under the chosen mode do not rank, so fewer than
    k rows may come back.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    count = (lambda row: row.r_exp) if mode == "explicit" else (lambda row: row.r_imp)
    ranked = [row for row in popularity if count(row) >= 1]
    ranked.sort(key=lambda row: (-count(row), row.feature_id))
    return ranked[:k]


def common_at_k(popularity: list[FeaturePopularity], k: int) -> OverlapRow:
    """Overlap between the explicit and implicit top-k feature sets."""
    explicit = {row.feature_id for row in top_k(popularity, "explicit", k)}
    implicit = {row.feature_id for row in top_k(popularity, "implicit", k)}
    common = len(explicit & implicit)
    return OverlapRow(k=k, common=common, percentage=common / k)
