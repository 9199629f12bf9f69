"""Cosine and top-k Jaccard similarity between explicit and implicit profiles.

The Jaccard comparison needs binary vectors, so the weighted implicit profile
is first cut to its k heaviest features, where k is the number of features
the user rated explicitly for that attribute type.  The explicit side is
already binary and enters whole.

Both metrics are invariant to rescaling a profile by a positive constant, so
the report produced by :func:`evaluate` does not depend on the logarithm base
used by the log-weighted profiling methods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .catalog import AttributeType, Catalog
from .errors import UndefinedSimilarityError
from .interactions import Dataset
from .profiling import (
    ProfileContext,
    ProfileMethod,
    UserProfile,
    build_context,
    build_profile,
    explicit_profile,
)


class SimilarityMetric(str, Enum):
    COSINE = "cosine"
    JACCARD = "jaccard"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class ReportRow:
    """One aggregated cell: average pairwise similarity over included users."""

    metric: SimilarityMetric
    attribute_type: AttributeType
    method: ProfileMethod
    average_similarity: float
    users_included: int
    users_skipped: int


@dataclass(frozen=True)
class SimilarityReport:
    rows: tuple[ReportRow, ...]

    def cell(
        self, metric: SimilarityMetric, attribute_type: AttributeType, method: ProfileMethod
    ) -> ReportRow:
        for row in self.rows:
            if (
                row.metric is metric
                and row.attribute_type is attribute_type
                and row.method is method
            ):
                return row
        raise KeyError((metric, attribute_type, method))


def cosine(p: UserProfile, q: UserProfile) -> float:
    """Cosine of two nonempty profiles of the same attribute type.

    Nonnegative weights keep the value in [0, 1]; the result is clamped at 1
    to absorb last-bit float roundoff in the norm product.
    """
    if p.attribute_type is not q.attribute_type:
        raise ValueError(
            f"attribute types differ: {p.attribute_type.value} vs {q.attribute_type.value}"
        )
    if not p.weights or not q.weights:
        raise UndefinedSimilarityError("cosine of an empty profile is undefined")
    dot = math.fsum(w * q.weights[f] for f, w in p.weights.items() if f in q.weights)
    norm_p_sq = math.fsum(w * w for w in p.weights.values())
    norm_q_sq = math.fsum(w * w for w in q.weights.values())
    # sqrt of the product (not the product of sqrts) keeps identical profiles
    # at exactly 1; the clamp absorbs roundoff in the general case.
    return min(1.0, dot / math.sqrt(norm_p_sq * norm_q_sq))


def topk_binarize(p: UserProfile, k: int) -> frozenset[str]:
    """The min(k, nnz) heaviest features of ``p``.

    Ties at the cutoff boundary break by feature id ascending, which makes
    the result deterministic and independent of insertion order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(p.weights.items(), key=lambda kv: (-kv[1], kv[0]))
    return frozenset(f for f, _ in ranked[:k])


def jaccard(a: frozenset[str] | set[str], b: frozenset[str] | set[str]) -> float:
    """|A∩B| / |A∪B|; undefined when both sets are empty."""
    if not a and not b:
        raise UndefinedSimilarityError("jaccard of two empty sets is undefined")
    return len(a & b) / len(a | b)


def pairwise_similarity(
    user_id: str,
    method: ProfileMethod,
    metric: SimilarityMetric,
    ctx: ProfileContext,
    dataset: Dataset,
) -> float | None:
    """Similarity between one user's implicit and explicit profile.

    Returns ``None`` (skip marker) when either profile is empty for the
    context's attribute type.  For Jaccard the implicit profile is cut to the
    user's explicit feature count before comparison.
    """
    explicit = explicit_profile(user_id, dataset, ctx.attribute_type)
    implicit = build_profile(method, user_id, ctx)
    if not explicit.weights or not implicit.weights:
        return None
    if metric is SimilarityMetric.COSINE:
        return cosine(implicit, explicit)
    return jaccard(topk_binarize(implicit, explicit.nnz), explicit.support)


def evaluate(
    dataset: Dataset,
    catalog: Catalog,
    methods: Sequence[ProfileMethod],
    types: Sequence[AttributeType],
    metrics: Sequence[SimilarityMetric],
    empty_profiles: str = "skip",
) -> SimilarityReport:
    """Average pairwise similarity per (metric, attribute type, method) cell.

    The caller decides the cohort (typically reliability-filtered).  Users
    whose explicit or implicit profile is empty are excluded from the cell
    mean and counted in ``users_skipped``; with ``empty_profiles="zero"``
    they score 0 and stay included (sensitivity mode).
    """
    if empty_profiles not in ("skip", "zero"):
        raise ValueError("empty_profiles must be 'skip' or 'zero'")
    contexts = {t: build_context(dataset, catalog, t) for t in types}
    user_ids = sorted(dataset.users)
    rows: list[ReportRow] = []
    for metric in metrics:
        for attribute_type in types:
            ctx = contexts[attribute_type]
            for method in methods:
                values: list[float] = []
                skipped = 0
                for user_id in user_ids:
                    value = pairwise_similarity(user_id, method, metric, ctx, dataset)
                    if value is None:
                        if empty_profiles == "zero":
                            values.append(0.0)
                        else:
                            skipped += 1
                    else:
                        values.append(value)
                average = math.fsum(values) / len(values) if values else 0.0
                rows.append(
                    ReportRow(metric, attribute_type, method, average, len(values), skipped)
                )
    return SimilarityReport(tuple(rows))
