"""Command-line entry point orchestrating ingestion, evaluation, and serving.

Global flags live on the top-level group and may also come from a plain
``key = value`` config file (``--config``); explicit command-line flags win
over config values.  Exit codes: 0 success, 2 data/validation error, 64 usage
error.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click

from . import movies_import, similarity, stats
from .catalog import AttributeType, Catalog, load_catalog
from .errors import WorkbenchError
from .interactions import (
    DEFAULT_MINIMUMS,
    Dataset,
    Gender,
    ReliabilityPolicy,
    filter_reliable,
    load_interactions,
    summary_stats,
)
from .profiling import ProfileMethod, build_context, build_profile, explicit_profile, recommend_top_n
from .similarity import SimilarityMetric
from .tablefmt import FORMATS, render_table

DEFAULT_METHODS = [m.value for m in ProfileMethod]
DEFAULT_TYPES = [AttributeType.GENRE.value, AttributeType.ACTOR.value, AttributeType.DIRECTOR.value]
DEFAULT_METRICS = [m.value for m in SimilarityMetric]

_CONFIG_KEYS = {
    "catalog",
    "users",
    "favourites",
    "trials",
    "format",
    "out",
    "seed",
    "reliability_filter",
    "precision_threshold",
    "log_base",
} | {f"min_{key}" for key in DEFAULT_MINIMUMS}


@dataclass
class RunConfig:
    """Validated global options shared by all subcommands."""

    catalog: Path | None = None
    users: Path | None = None
    favourites: Path | None = None
    trials: Path | None = None
    format: str = "csv"
    out: Path | None = None
    seed: int | None = None  # reserved for future sampling features
    reliability_filter: bool = True
    precision_threshold: float = 0.5
    log_base: float | None = None  # None = natural log
    minimums: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_MINIMUMS))

    def policy(self) -> ReliabilityPolicy:
        return ReliabilityPolicy(self.precision_threshold, dict(self.minimums))

    def weight_divisor(self) -> float:
        """Scale factor turning natural-log weights into the chosen base."""
        return 1.0 if self.log_base is None else math.log(self.log_base)

    def require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise click.UsageError(f"missing required option --{name.replace('_', '-')}")


def _parse_config_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise click.UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if key not in _CONFIG_KEYS:
            raise click.UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _parse_log_base(raw: str) -> float | None:
    if raw.lower() in ("e", "natural", ""):
        return None
    try:
        base = float(raw)
    except ValueError:
        raise click.UsageError(f"--log-base must be a number or 'e', got {raw!r}") from None
    if base <= 1.0:
        raise click.UsageError("--log-base must be greater than 1")
    return base


def _parse_bool(raw: str, key: str) -> bool:
    if raw.lower() in ("true", "1", "yes"):
        return True
    if raw.lower() in ("false", "0", "no"):
        return False
    raise click.UsageError(f"config key {key!r} must be true/false, got {raw!r}")


def _from_command_line(ctx: click.Context, name: str) -> bool:
    source = ctx.get_parameter_source(name)
    return source is not None and source.name in ("COMMANDLINE", "ENVIRONMENT")


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--catalog", type=click.Path(path_type=Path), default=None, help="Catalog CSV file.")
@click.option("--users", type=click.Path(path_type=Path), default=None, help="Users CSV file.")
@click.option("--favourites", type=click.Path(path_type=Path), default=None)
@click.option("--trials", type=click.Path(path_type=Path), default=None)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="csv", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Output file (default stdout).")
@click.option("--seed", type=int, default=None, help="Reserved for future sampling features.")
@click.option(
    "--no-reliability-filter",
    "no_reliability_filter",
    is_flag=True,
    default=False,
    help="Evaluate over all users instead of the reliable subset.",
)
@click.option("--precision-threshold", type=click.FloatRange(0.0, 1.0), default=0.5, show_default=True)
@click.option(
    "--log-base",
    default="e",
    show_default=True,
    help="Logarithm base for exported raw weights; similarity reports are base-invariant.",
)
@click.pass_context
def cli(ctx, config, catalog, users, favourites, trials, fmt, out, seed,
        no_reliability_filter, precision_threshold, log_base):
    """Workbench comparing explicit feature preferences with implicit user profiles."""
    cfg = RunConfig()
    if config is not None:
        for key, value in _parse_config_file(config).items():
            if key in ("catalog", "users", "favourites", "trials", "out"):
                setattr(cfg, key, Path(value))
            elif key == "format":
                if value not in FORMATS:
                    raise click.UsageError(f"config key 'format' must be one of {FORMATS}")
                cfg.format = value
            elif key == "seed":
                cfg.seed = int(value)
            elif key == "reliability_filter":
                cfg.reliability_filter = _parse_bool(value, key)
            elif key == "precision_threshold":
                cfg.precision_threshold = float(value)
            elif key == "log_base":
                cfg.log_base = _parse_log_base(value)
            elif key.startswith("min_"):
                cfg.minimums[key[4:]] = int(value)

    if catalog is not None:
        cfg.catalog = catalog
    if users is not None:
        cfg.users = users
    if favourites is not None:
        cfg.favourites = favourites
    if trials is not None:
        cfg.trials = trials
    if _from_command_line(ctx, "fmt"):
        cfg.format = fmt
    if out is not None:
        cfg.out = out
    if seed is not None:
        cfg.seed = seed
    if no_reliability_filter:
        cfg.reliability_filter = False
    if _from_command_line(ctx, "precision_threshold"):
        cfg.precision_threshold = precision_threshold
    if _from_command_line(ctx, "log_base"):
        cfg.log_base = _parse_log_base(log_base)

    try:
        cfg.policy()
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    ctx.obj = cfg


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out is None:
        click.echo(text, nl=False)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load_catalog(cfg: RunConfig) -> Catalog:
    cfg.require("catalog")
    return load_catalog(cfg.catalog)


def _load_dataset(cfg: RunConfig, catalog: Catalog) -> Dataset:
    cfg.require("users", "favourites")
    return load_interactions(cfg.users, cfg.favourites, cfg.trials, catalog)


def _evaluation_dataset(cfg: RunConfig, catalog: Catalog) -> Dataset:
    dataset = _load_dataset(cfg, catalog)
    if cfg.reliability_filter:
        dataset = filter_reliable(dataset, cfg.policy())
    return dataset


def _split_tokens(raw: str) -> list[str]:
    return [token.strip() for token in raw.split(",") if token.strip()]


def _parse_enum_list(raw: str, enum_cls, what: str) -> list:
    tokens = _split_tokens(raw)
    if not tokens:
        raise click.UsageError(f"--{what} must name at least one value")
    values = []
    for token in tokens:
        try:
            values.append(enum_cls(token))
        except ValueError:
            valid = ", ".join(e.value for e in enum_cls)
            raise click.UsageError(f"unknown {what[:-1]} {token!r} (valid: {valid})") from None
    return values


@cli.command()
@click.pass_obj
def validate(cfg: RunConfig):
    """Load everything and report integrity warnings."""
    catalog = _load_catalog(cfg)
    lines = [
        f"catalog: {len(catalog.items)} items, {len(catalog.features)} features",
    ]
    if cfg.users is not None or cfg.favourites is not None:
        dataset = _load_dataset(cfg, catalog)
        unknown_features = sum(
            1
            for favourite in dataset.favourites
            if favourite.kind.value == "feature"
            and favourite.target_id not in dataset.feature_types
        )
        lines += [
            f"users: {len(dataset.users)}",
            f"favourites: {len(dataset.favourites)}",
            f"trials: {len(dataset.trials)}",
            f"warning: duplicate favourite rows collapsed: {dataset.duplicate_favourites}",
            f"warning: item favourites not in catalog: {len(dataset.unresolved_items)}",
            f"warning: feature favourites not in catalog: {unknown_features}",
        ]
    _emit(cfg, "".join(line + "\n" for line in lines))


@cli.command()
@click.option("--user", required=True)
@click.option(
    "--method",
    type=click.Choice([m.value for m in ProfileMethod] + ["explicit"]),
    required=True,
)
@click.option("--type", "type_", type=click.Choice([t.value for t in AttributeType]), required=True)
@click.pass_obj
def profile(cfg: RunConfig, user: str, method: str, type_: str):
    """Dump one user profile as weight rows."""
    catalog = _load_catalog(cfg)
    dataset = _load_dataset(cfg, catalog)
    attribute_type = AttributeType(type_)
    if method == "explicit":
        prof = explicit_profile(user, dataset, attribute_type)
        divisor = 1.0
    else:
        dataset.require_user(user)
        ctx = build_context(dataset, catalog, attribute_type)
        prof = build_profile(ProfileMethod(method), user, ctx)
        # Only the log-family methods carry a base; counts and shares do not.
        divisor = cfg.weight_divisor() if method in ("symeonidis", "tfidf") else 1.0
    columns = ("user_id", "attribute_type", "origin", "method", "feature_id", "weight")
    rows = [
        (
            prof.user_id,
            prof.attribute_type.value,
            prof.origin,
            prof.method.value if prof.method else "",
            feature_id,
            f"{weight / divisor:.10g}",
        )
        for feature_id, weight in sorted(prof.weights.items())
    ]
    _emit(cfg, render_table(columns, rows, cfg.format))


@cli.command()
@click.option("--methods", default=",".join(DEFAULT_METHODS), show_default=True)
@click.option("--types", default=",".join(DEFAULT_TYPES), show_default=True)
@click.option("--metrics", default=",".join(DEFAULT_METRICS), show_default=True)
@click.option(
    "--empty-profiles",
    type=click.Choice(["skip", "zero"]),
    default="skip",
    show_default=True,
    help="Skip users with an empty profile, or score them 0 (sensitivity mode).",
)
@click.pass_obj
def evaluate(cfg: RunConfig, methods: str, types: str, metrics: str, empty_profiles: str):
    """Average explicit-vs-implicit profile similarity per method and type."""
    # Enumerated options are validated before any file is touched.
    method_list = _parse_enum_list(methods, ProfileMethod, "methods")
    type_list = _parse_enum_list(types, AttributeType, "types")
    metric_list = _parse_enum_list(metrics, SimilarityMetric, "metrics")
    catalog = _load_catalog(cfg)
    dataset = _evaluation_dataset(cfg, catalog)
    report = similarity.evaluate(
        dataset,
        catalog,
        methods=method_list,
        types=type_list,
        metrics=metric_list,
        empty_profiles=empty_profiles,
    )
    columns = (
        "metric",
        "attribute_type",
        "method",
        "avg_similarity_pct",
        "users_included",
        "users_skipped",
    )
    rows = [
        (
            row.metric.value,
            row.attribute_type.value,
            row.method.value,
            f"{row.average_similarity * 100:.2f}",
            row.users_included,
            row.users_skipped,
        )
        for row in report.rows
    ]
    _emit(cfg, render_table(columns, rows, cfg.format))


def _parse_k_list(raw: str, population: int) -> list[int]:
    ks = []
    for token in _split_tokens(raw):
        if token.lower() == "all":
            if population >= 1:
                ks.append(population)
        else:
            try:
                k = int(token)
            except ValueError:
                raise click.UsageError(f"--k entries must be integers or 'all', got {token!r}") from None
            if k < 1:
                raise click.UsageError("--k entries must be >= 1")
            ks.append(k)
    if not ks:
        raise click.UsageError("--k must name at least one cutoff")
    return ks


@cli.command(name="stats")
@click.option("--table", type=click.Choice(["overlap", "gender-top", "summary"]), required=True)
@click.option("--types", "--type", "types", default=AttributeType.GENRE.value, show_default=True)
@click.option(
    "--k",
    "k_raw",
    default=None,
    help="Comma-separated ranking cutoffs; 'all' means the full feature population. "
    "Defaults: overlap 5,10,15,all; gender-top 5.",
)
@click.option(
    "--gender",
    type=click.Choice([Gender.MALE.value, Gender.FEMALE.value, "any"]),
    default="any",
    show_default=True,
)
@click.option(
    "--reliable-only",
    is_flag=True,
    default=False,
    help="Restrict gender-top cohorts to reliable users.",
)
@click.pass_obj
def stats_cmd(cfg: RunConfig, table: str, types: str, k_raw: str, gender: str, reliable_only: bool):
    """Overlap, gender-stratified top-feature, and dataset summary tables."""
    attribute_types = _parse_enum_list(types, AttributeType, "types")
    catalog = _load_catalog(cfg)
    dataset = _load_dataset(cfg, catalog)
    policy = cfg.policy()

    if table == "summary":
        reliable = filter_reliable(dataset, policy)
        rows: list[tuple] = []
        for section, summary in (("all", summary_stats(dataset, policy)),
                                 ("reliable", summary_stats(reliable, policy))):
            rows.append((section, "users", summary.users_total))
            for key, count in summary.users_by_source.items():
                rows.append((section, f"users_{key}", count))
            for key, count in summary.users_by_gender.items():
                rows.append((section, f"users_gender_{key}", count))
            for key, count in summary.users_by_age_range.items():
                rows.append((section, f"users_age_{key}", count))
            for key, count in summary.users_by_country.items():
                rows.append((section, f"users_country_{key}", count))
            rows.append((section, "reliable_users", summary.reliable_users))
            rows.append((section, "favourites", summary.favourites_total))
            rows.append((section, "favourites_unique", summary.favourites_unique))
            rows.append((section, "favourites_item", summary.item_favourites))
            for key, count in summary.feature_favourites_by_type.items():
                rows.append((section, f"favourites_{key}", count))
            rows.append((section, "unresolved_item_favourites", summary.unresolved_item_favourites))
        _emit(cfg, render_table(("section", "key", "value"), rows, cfg.format))
        return

    gender_filter = None if gender == "any" else Gender(gender)

    if table == "overlap":
        cohort = stats.group_cohort(
            dataset, gender_filter, reliable_only=cfg.reliability_filter, policy=policy
        )
        rows = []
        for attribute_type in attribute_types:
            popularity = stats.feature_popularity(dataset, catalog, attribute_type, cohort)
            for k in _parse_k_list(k_raw or "5,10,15,all", len(popularity)):
                overlap = stats.common_at_k(popularity, k)
                rows.append(
                    (
                        attribute_type.value,
                        overlap.k,
                        overlap.common,
                        f"{overlap.percentage * 100:.2f}",
                    )
                )
        _emit(cfg, render_table(("attribute_type", "k", "common", "common_pct"), rows, cfg.format))
        return

    # gender-top: explicit and implicit top-k features side by side.
    cohort = stats.group_cohort(dataset, gender_filter, reliable_only=reliable_only, policy=policy)
    rows = []
    for attribute_type in attribute_types:
        popularity = stats.feature_popularity(dataset, catalog, attribute_type, cohort)
        k = max(_parse_k_list(k_raw or "5", len(popularity)))
        top_explicit = stats.top_k(popularity, "explicit", k)
        top_implicit = stats.top_k(popularity, "implicit", k)
        for position in range(max(len(top_explicit), len(top_implicit))):
            exp = top_explicit[position] if position < len(top_explicit) else None
            imp = top_implicit[position] if position < len(top_implicit) else None
            rows.append(
                (
                    attribute_type.value,
                    position + 1,
                    exp.label if exp else "",
                    exp.r_exp if exp else "",
                    imp.label if imp else "",
                    imp.r_imp if imp else "",
                )
            )
    columns = ("attribute_type", "pos", "explicit_label", "r_exp", "implicit_label", "r_imp")
    _emit(cfg, render_table(columns, rows, cfg.format))


@cli.command()
@click.option("--user", required=True)
@click.option(
    "--method",
    type=click.Choice([m.value for m in ProfileMethod] + ["explicit"]),
    required=True,
)
@click.option("--type", "type_", type=click.Choice([t.value for t in AttributeType]), required=True)
@click.option("--n", type=click.IntRange(min=1), default=10, show_default=True)
@click.pass_obj
def recommend(cfg: RunConfig, user: str, method: str, type_: str, n: int):
    """Top-n items whose feature vectors best match a user profile."""
    catalog = _load_catalog(cfg)
    dataset = _load_dataset(cfg, catalog)
    attribute_type = AttributeType(type_)
    if method == "explicit":
        prof = explicit_profile(user, dataset, attribute_type)
    else:
        dataset.require_user(user)
        ctx = build_context(dataset, catalog, attribute_type)
        prof = build_profile(ProfileMethod(method), user, ctx)
    ranked = recommend_top_n(prof, catalog, n)
    rows = [(rank, item_id, f"{score:.10g}") for rank, (item_id, score) in enumerate(ranked, 1)]
    _emit(cfg, render_table(("rank", "item_id", "score"), rows, cfg.format))


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8099, show_default=True)
@click.option("--decoys-per-true", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--cors-origin", multiple=True, default=("*",), show_default=True)
@click.option("--ui-dir", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None)
@click.pass_obj
def serve(cfg: RunConfig, host: str, port: int, decoys_per_true: int, cors_origin, ui_dir):
    """Run the data-collection HTTP service."""
    import uvicorn

    from .service import StorePaths, create_app

    cfg.require("catalog", "users", "favourites", "trials")
    app = create_app(
        catalog=load_catalog(cfg.catalog),
        paths=StorePaths(cfg.users, cfg.favourites, cfg.trials),
        policy=cfg.policy(),
        decoys_per_true=decoys_per_true,
        cors_origins=tuple(cors_origin),
        ui_dir=ui_dir,
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")


@cli.command(name="import-catalog")
@click.option("--movies", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--credits", "credits_", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--out", "out_", type=click.Path(path_type=Path), required=True)
def import_catalog(movies: Path, credits_: Path | None, out_: Path):
    """Convert a "The Movies Dataset"-style export into the catalog format."""
    stats_ = movies_import.convert_movies_export(movies, out_, credits_)
    click.echo(f"items written: {stats_.items_written}")
    click.echo(f"rows skipped: {stats_.rows_skipped}")
    click.echo(f"duplicate items: {stats_.duplicate_items}")
    click.echo(f"label collisions: {stats_.label_collisions}")
    for key, count in sorted(stats_.features_by_type.items()):
        click.echo(f"features[{key}]: {count}")


def main(argv: list[str] | None = None) -> int:
    """Console entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        return 130
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 64
    except click.ClickException as exc:
        exc.show()
        return 2
    except WorkbenchError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
