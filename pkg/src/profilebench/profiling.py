"""The four implicit profiling methods plus explicit profile construction.

All methods build a sparse nonnegative weight vector over the features of one
attribute type.  With binary favourites the rating threshold separating liked
from ignored items is 0 (a favourite counts as rating 1), so every favourited
item contributes.

Method weights for a user ``u`` and feature ``f``:

* zhang:      1 whenever ``f`` occurs in at least one of u's rated items
* li:         ``N(u,f) / M(u)`` — occurrence share among u's rated items
* symeonidis: ``N(u,f) * ln(user_count / UF(f))`` — inverse user frequency
* tfidf:      ``N(u,f) * ln(item_count / n_f)`` — inverse document frequency

``N(u,f)`` counts u's rated items containing ``f``; ``M(u)`` counts all of
u's rated items (not restricted to the attribute type); ``UF(f)`` counts
users whose rated items contain ``f``; ``n_f`` is the catalog document
frequency; logarithms are natural.  Zero weights are never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .catalog import AttributeType, Catalog
from .errors import EmptyProfileError
from .interactions import Dataset

BINARY_RATING_THRESHOLD = 0


class ProfileMethod(str, Enum):
    ZHANG = "zhang"
    LI = "li"
    SYMEONIDIS = "symeonidis"
    TFIDF = "tfidf"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class UserProfile:
    """Sparse nonnegative weight vector over one attribute type.

    ``origin`` is ``explicit`` or ``implicit``; implicit profiles carry the
    method that produced them.  Explicit profiles have all weights exactly 1.
    """

    user_id: str
    attribute_type: AttributeType
    origin: str
    weights: Mapping[str, float]
    method: ProfileMethod | None = None

    def __post_init__(self) -> None:
        if any(w <= 0 for w in self.weights.values()):
            raise ValueError("profile weights must be strictly positive")

    @property
    def support(self) -> frozenset[str]:
        return frozenset(self.weights)

    @property
    def nnz(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class ProfileContext:
    """Precomputed per-(dataset, catalog, attribute type) count statistics.

    ``rated_items[u]`` is the user's total count of catalog-resolved item
    favourites; ``feature_counts[u][f]`` the count of those items containing
    feature ``f`` of this context's type; ``user_frequency[f]`` the number of
    users with ``feature_counts[u][f] >= 1``.  Item favourites that do not
    resolve in the catalog are skipped and tallied in ``unresolved_skipped``.
    """

    attribute_type: AttributeType
    rated_items: Mapping[str, int]
    feature_counts: Mapping[str, Mapping[str, int]]
    user_frequency: Mapping[str, int]
    user_count: int
    item_count: int
    doc_freq: Mapping[str, int]
    unresolved_skipped: int = 0


def build_context(dataset: Dataset, catalog: Catalog, attribute_type: AttributeType) -> ProfileContext:
    """Count the statistics every implicit method needs, once per type."""
    rated_items: dict[str, int] = {}
    feature_counts: dict[str, dict[str, int]] = {}
    user_frequency: dict[str, int] = {}
    skipped = 0
    for user_id in dataset.users:
        counts: dict[str, int] = {}
        rated = 0
        for item_id in dataset.item_favourites(user_id):
            item = catalog.items.get(item_id)
            if item is None:
                skipped += 1
                continue
            rated += 1
            for feature_id in item.features:
                if catalog.features[feature_id].attribute_type is attribute_type:
                    counts[feature_id] = counts.get(feature_id, 0) + 1
        rated_items[user_id] = rated
        feature_counts[user_id] = counts
        for feature_id in counts:
            user_frequency[feature_id] = user_frequency.get(feature_id, 0) + 1
    return ProfileContext(
        attribute_type=attribute_type,
        rated_items=rated_items,
        feature_counts=feature_counts,
        user_frequency=user_frequency,
        user_count=len(dataset.users),
        item_count=len(catalog.items),
        doc_freq={f: catalog.doc_freq[f] for counts in feature_counts.values() for f in counts},
        unresolved_skipped=skipped,
    )


def explicit_profile(user_id: str, dataset: Dataset, attribute_type: AttributeType) -> UserProfile:
    """Weight 1 for every feature of the type the user explicitly favourited."""
    weights = {f: 1.0 for f in dataset.feature_favourites(user_id, attribute_type)}
    return UserProfile(user_id, attribute_type, "explicit", weights)


def zhang_profile(user_id: str, ctx: ProfileContext) -> UserProfile:
    weights = {f: 1.0 for f in ctx.feature_counts.get(user_id, {})}
    return UserProfile(user_id, ctx.attribute_type, "implicit", weights, ProfileMethod.ZHANG)


def li_profile(user_id: str, ctx: ProfileContext) -> UserProfile:
    rated = ctx.rated_items.get(user_id, 0)
    weights: dict[str, float] = {}
    if rated >= 1:
        weights = {f: n / rated for f, n in ctx.feature_counts.get(user_id, {}).items()}
    return UserProfile(user_id, ctx.attribute_type, "implicit", weights, ProfileMethod.LI)


def symeonidis_profile(user_id: str, ctx: ProfileContext) -> UserProfile:
    weights: dict[str, float] = {}
    for feature_id, n in ctx.feature_counts.get(user_id, {}).items():
        uf = ctx.user_frequency.get(feature_id, 0)
        if uf < 1:
            continue
        weight = n * math.log(ctx.user_count / uf)
        if weight > 0:
            weights[feature_id] = weight
    return UserProfile(user_id, ctx.attribute_type, "implicit", weights, ProfileMethod.SYMEONIDIS)


def tfidf_profile(user_id: str, ctx: ProfileContext) -> UserProfile:
    weights: dict[str, float] = {}
    for feature_id, n in ctx.feature_counts.get(user_id, {}).items():
        doc_freq = ctx.doc_freq.get(feature_id)
        if doc_freq is None or doc_freq < 1:
            continue
        weight = n * math.log(ctx.item_count / doc_freq)
        if weight > 0:
            weights[feature_id] = weight
    return UserProfile(user_id, ctx.attribute_type, "implicit", weights, ProfileMethod.TFIDF)


_BUILDERS = {
    ProfileMethod.ZHANG: zhang_profile,
    ProfileMethod.LI: li_profile,
    ProfileMethod.SYMEONIDIS: symeonidis_profile,
    ProfileMethod.TFIDF: tfidf_profile,
}


def build_profile(method: ProfileMethod, user_id: str, ctx: ProfileContext) -> UserProfile:
    """Dispatch to the method-specific builder."""
    return _BUILDERS[ProfileMethod(method)](user_id, ctx)


def recommend_top_n(profile: UserProfile, catalog: Catalog, n: int) -> list[tuple[str, float]]:
    """Match a profile against every item's binary feature-indicator vector.

    Items are scored by cosine between the profile and the indicator vector
    of the item's features of the profile's attribute type; zero-score items
    are dropped and the top ``n`` are returned as ``(item_id, score)``,
    ordered by score descending then item id ascending.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not profile.weights:
        raise EmptyProfileError(f"profile of user {profile.user_id!r} is empty")
    norm = math.sqrt(math.fsum(w * w for w in profile.weights.values()))
    scored: list[tuple[str, float]] = []
    for item_id, item in catalog.items.items():
        typed = [
            f
            for f in item.features
            if catalog.features[f].attribute_type is profile.attribute_type
        ]
        if not typed:
            continue
        dot = math.fsum(profile.weights.get(f, 0.0) for f in typed)
        if dot <= 0:
            continue
        scored.append((item_id, dot / (norm * math.sqrt(len(typed)))))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:n]
