"""Workbench comparing explicit feature preferences with implicit user profiles."""

from .catalog import AttributeType, Catalog, Feature, Item, load_catalog
from .errors import (
    DataFormatError,
    EmptyCohortError,
    EmptyProfileError,
    IntegrityError,
    NotFoundError,
    UndefinedSimilarityError,
    WorkbenchError,
)
from .interactions import (
    ConsistencyTrial,
    Dataset,
    Favourite,
    FavouriteKind,
    Gender,
    ReliabilityPolicy,
    Source,
    User,
    consistency_precision,
    filter_reliable,
    is_reliable,
    load_interactions,
    minimum_favourites_met,
    summary_stats,
)
from .profiling import (
    ProfileContext,
    ProfileMethod,
    UserProfile,
    build_context,
    build_profile,
    explicit_profile,
    li_profile,
    recommend_top_n,
    symeonidis_profile,
    tfidf_profile,
    zhang_profile,
)
from .similarity import (
    SimilarityMetric,
    SimilarityReport,
    cosine,
    evaluate,
    jaccard,
    pairwise_similarity,
    topk_binarize,
)
from .stats import FeaturePopularity, OverlapRow, common_at_k, feature_popularity, group_cohort, top_k

__version__ = "0.1.0"
