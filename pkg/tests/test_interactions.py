import pytest

from profilebench.catalog import AttributeType, load_catalog
from profilebench.errors import IntegrityError, NotFoundError
from profilebench.interactions import (
    ConsistencyTrial,
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

from .conftest import make_dataset, write_csv


@pytest.fixture(scope="module")
def mini(mini_files):
    catalog = load_catalog(mini_files["catalog"])
    dataset = load_interactions(
        mini_files["users"], mini_files["favourites"], mini_files["trials"], catalog
    )
    return catalog, dataset


def test_load_counts_and_duplicate_collapse(mini):
    _, dataset = mini
    assert len(dataset.users) == 5
    # 25 raw favourite rows, one exact duplicate.
    assert len(dataset.favourites) == 24
    assert dataset.duplicate_favourites == 1
    assert dataset.unresolved_items == {"mX"}
    assert "gX" not in dataset.feature_types
    assert dataset.feature_types["g1"] is AttributeType.GENRE


def test_unknown_user_reference_is_integrity_error(tmp_path):
    users = tmp_path / "users.csv"
    favourites = tmp_path / "favourites.csv"
    write_csv(users, ["user_id", "source", "age_range", "gender", "country"],
              [["u1", "volunteer", "", "", ""]])
    write_csv(favourites, ["user_id", "kind", "target_id"], [["ghost", "item", "m1"]])
    with pytest.raises(IntegrityError, match="ghost"):
        load_interactions(users, favourites)


def test_minimum_favourites_policy(mini):
    _, dataset = mini
    policy = ReliabilityPolicy()
    assert minimum_favourites_met("v1", dataset, policy) is True
    assert minimum_favourites_met("v2", dataset, policy) is False
    # One short on movies fails.
    tight = ReliabilityPolicy(minimums={"item": 7})
    assert minimum_favourites_met("v1", dataset, tight) is False
    # All-zero minimums are vacuously met by anyone.
    assert minimum_favourites_met("v2", dataset, ReliabilityPolicy(minimums={})) is True
    with pytest.raises(NotFoundError):
        minimum_favourites_met("ghost", dataset, policy)


def test_consistency_precision_cases(mini):
    _, dataset = mini
    assert consistency_precision("c1", dataset) == 1.0
    assert consistency_precision("c2", dataset) == pytest.approx(1 / 3)
    assert consistency_precision("c3", dataset) is None  # no trials at all
    assert consistency_precision("v1", dataset) is None


def test_precision_eight_selected_five_true():
    users = [User("u1", Source.CROWDSOURCED)]
    trials = [
        ConsistencyTrial("u1", FavouriteKind.ITEM, f"t{i}", is_true_favourite=i < 5, selected=True)
        for i in range(8)
    ]
    dataset = make_dataset(users, trials=trials)
    assert consistency_precision("u1", dataset) == 0.625


def test_reliability_rules(mini):
    _, dataset = mini
    policy = ReliabilityPolicy()
    assert is_reliable("v1", dataset, policy) is True
    assert is_reliable("v2", dataset, policy) is False
    assert is_reliable("c1", dataset, policy) is True
    assert is_reliable("c2", dataset, policy) is False
    assert is_reliable("c3", dataset, policy) is False  # undefined precision fails closed


def test_crowdsourced_threshold_is_inclusive():
    users = [User("u1", Source.CROWDSOURCED)]
    trials = [
        ConsistencyTrial("u1", FavouriteKind.ITEM, "t1", is_true_favourite=True, selected=True),
        ConsistencyTrial("u1", FavouriteKind.ITEM, "t2", is_true_favourite=False, selected=True),
    ]
    dataset = make_dataset(users, trials=trials)
    assert consistency_precision("u1", dataset) == 0.5
    assert is_reliable("u1", dataset, ReliabilityPolicy()) is True


def test_volunteer_ignores_precision(mini):
    # v1 has no trials (undefined precision) and still counts as reliable.
    _, dataset = mini
    assert is_reliable("v1", dataset, ReliabilityPolicy()) is True


def test_filter_reliable_is_idempotent(mini):
    _, dataset = mini
    policy = ReliabilityPolicy()
    once = filter_reliable(dataset, policy)
    assert sorted(once.users) == ["c1", "v1"]
    assert all(f.user_id in once.users for f in once.favourites)
    assert all(t.user_id in once.users for t in once.trials)
    assert filter_reliable(once, policy) == once


def test_filter_reliable_can_empty_out():
    users = [User("u1", Source.CROWDSOURCED)]
    dataset = make_dataset(users)
    filtered = filter_reliable(dataset, ReliabilityPolicy())
    assert filtered.users == {}
    assert filtered.favourites == ()


def test_summary_stats_counts(mini):
    _, dataset = mini
    summary = summary_stats(dataset)
    assert summary.users_total == 5
    assert summary.users_by_source == {"crowdsourced": 3, "volunteer": 2}
    assert summary.users_by_gender == {"female": 2, "male": 2, "unspecified": 1}
    assert summary.reliable_users == 2
    assert summary.favourites_total == 24
    assert summary.favourites_unique == 16
    assert summary.item_favourites == 11
    assert summary.feature_favourites_by_type == {
        "actor": 4,
        "director": 1,
        "genre": 7,
        "unknown": 1,
    }
    assert summary.unresolved_item_favourites == 1
    # Additivity over the source partition.
    assert sum(summary.users_by_source.values()) == summary.users_total
    assert sum(summary.users_by_gender.values()) == summary.users_total


def test_summary_stats_empty_dataset():
    summary = summary_stats(make_dataset([]))
    assert summary.users_total == 0
    assert summary.favourites_total == 0
    assert summary.reliable_users == 0
    assert summary.feature_favourites_by_type == {}


def test_row_order_does_not_change_dataset(tmp_path, mini_files):
    catalog = load_catalog(mini_files["catalog"])
    baseline = load_interactions(
        mini_files["users"], mini_files["favourites"], mini_files["trials"], catalog
    )
    # Rewrite the favourites file with rows reversed.
    lines = mini_files["favourites"].read_text().splitlines()
    shuffled = tmp_path / "favourites.csv"
    shuffled.write_text("\n".join([lines[0]] + lines[:0:-1]) + "\n")
    permuted = load_interactions(mini_files["users"], shuffled, mini_files["trials"], catalog)
    assert permuted.favourites == baseline.favourites
    policy = ReliabilityPolicy()
    for user_id in baseline.users:
        assert is_reliable(user_id, permuted, policy) == is_reliable(user_id, baseline, policy)


def test_duplicate_trial_rejected(tmp_path):
    users = tmp_path / "users.csv"
    favourites = tmp_path / "favourites.csv"
    trials = tmp_path / "trials.csv"
    write_csv(users, ["user_id", "source", "age_range", "gender", "country"],
              [["u1", "crowdsourced", "", "", ""]])
    write_csv(favourites, ["user_id", "kind", "target_id"], [])
    write_csv(
        trials,
        ["user_id", "kind", "target_id", "is_true_favourite", "selected"],
        [["u1", "item", "t1", "true", "true"], ["u1", "item", "t1", "true", "false"]],
    )
    with pytest.raises(IntegrityError, match="duplicate trial"):
        load_interactions(users, favourites, trials)


def test_gender_enum_round_trip():
    assert Gender("male") is Gender.MALE
    assert Gender("unspecified") is Gender.UNSPECIFIED
    with pytest.raises(ValueError):
        Gender("other")
