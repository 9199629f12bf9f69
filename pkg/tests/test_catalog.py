from pathlib import Path

import pytest

from profilebench.catalog import AttributeType, load_catalog, write_catalog
from profilebench.errors import DataFormatError, IntegrityError, NotFoundError

from .conftest import write_csv

HEADER = ["item_id", "title"] + [t.value for t in AttributeType]


def row(item_id, title, genre="", actor=""):
    cells = {t.value: "" for t in AttributeType}
    cells["genre"] = genre
    cells["actor"] = actor
    return [item_id, title] + [cells[t.value] for t in AttributeType]


def write_two_item_catalog(path: Path) -> None:
    write_csv(
        path,
        HEADER,
        [
            row("i1", "One", genre="g1:Action", actor="a1:Alan Holt"),
            row("i2", "Two", genre="g1:Action"),
        ],
    )


def test_doc_freq_counts_items_per_feature(tmp_path):
    path = tmp_path / "catalog.csv"
    write_two_item_catalog(path)
    catalog = load_catalog(path)
    assert catalog.doc_freq == {"g1": 2, "a1": 1}
    assert catalog.document_frequency("g1") == 2
    assert catalog.document_frequency("a1") == 1


def test_document_frequency_unknown_feature(tmp_path):
    path = tmp_path / "catalog.csv"
    write_two_item_catalog(path)
    with pytest.raises(NotFoundError):
        load_catalog(path).document_frequency("nope")


def test_empty_catalog_rejected(tmp_path):
    path = tmp_path / "catalog.csv"
    path.write_text("")
    with pytest.raises(DataFormatError, match="empty catalog"):
        load_catalog(path)
    write_csv(path, HEADER, [])
    with pytest.raises(DataFormatError, match="empty catalog"):
        load_catalog(path)


def test_malformed_pair_names_line_and_field(tmp_path):
    path = tmp_path / "catalog.csv"
    write_csv(path, HEADER, [row("i1", "One", genre="g1")])  # no label
    with pytest.raises(DataFormatError, match="catalog.csv:2.*genre"):
        load_catalog(path)


def test_conflicting_feature_definition_rejected(tmp_path):
    path = tmp_path / "catalog.csv"
    write_csv(
        path,
        HEADER,
        [row("i1", "One", genre="g1:Action"), row("i2", "Two", genre="g1:Drama")],
    )
    with pytest.raises(IntegrityError, match="redefined"):
        load_catalog(path)


def test_duplicate_type_label_under_two_ids_rejected(tmp_path):
    path = tmp_path / "catalog.csv"
    write_csv(
        path,
        HEADER,
        [row("i1", "One", genre="g1:Action"), row("i2", "Two", genre="g2:Action")],
    )
    with pytest.raises(IntegrityError, match="already used"):
        load_catalog(path)


def test_load_is_order_insensitive(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    rows = [
        row("i1", "One", genre="g1:Action", actor="a1:Alan Holt"),
        row("i2", "Two", genre="g1:Action|g2:Drama"),
        row("i3", "Three", actor="a1:Alan Holt"),
    ]
    write_csv(a, HEADER, rows)
    write_csv(b, HEADER, rows[::-1])
    assert load_catalog(a) == load_catalog(b)


def test_doc_freq_double_counting_identity(tmp_path):
    path = tmp_path / "catalog.csv"
    write_csv(
        path,
        HEADER,
        [
            row("i1", "One", genre="g1:Action|g2:Drama", actor="a1:Alan Holt"),
            row("i2", "Two", genre="g2:Drama"),
            row("i3", "Three", actor="a1:Alan Holt|a2:Bea Ruiz"),
        ],
    )
    catalog = load_catalog(path)
    assert sum(catalog.doc_freq.values()) == sum(len(i.features) for i in catalog.items.values())


def test_search_features_substring_and_ordering(tmp_path):
    path = tmp_path / "catalog.csv"
    write_csv(
        path,
        HEADER,
        [
            row("i1", "One", genre="g1:Action|g2:Drama"),
            row("i2", "Two", genre="g1:Action"),
            row("i3", "Three", genre="g3:Factual"),
        ],
    )
    catalog = load_catalog(path)
    hits = catalog.search_features(AttributeType.GENRE, "act", 10)
    assert [f.feature_id for f in hits] == ["g1", "g3"]  # Action (df 2), Factual (df 1)
    # Empty query matches everything, capped by limit.
    hits = catalog.search_features(AttributeType.GENRE, "", 2)
    assert [f.feature_id for f in hits] == ["g1", "g2"]  # df 2, then tie g2<g3 by id
    assert catalog.search_features(AttributeType.ACTOR, "anything", 5) == []


def test_popular_features_ties_break_by_feature_id(tmp_path):
    path = tmp_path / "catalog.csv"
    write_csv(
        path,
        HEADER,
        [
            row("i1", "One", genre="g2:Beta|g3:Gamma"),
            row("i2", "Two", genre="g2:Beta|g3:Gamma"),
            row("i3", "Three", genre="g1:Alpha|g2:Beta|g3:Gamma"),
            row("i4", "Four", genre="g1:Alpha|g2:Beta|g3:Gamma"),
            row("i5", "Five", genre="g1:Alpha|g2:Beta|g3:Gamma"),
            row("i6", "Six", genre="g1:Alpha|g2:Beta"),
            row("i7", "Seven", genre="g1:Alpha|g2:Beta"),
        ],
    )
    catalog = load_catalog(path)
    # doc freq: g1=5, g2=7, g3=5
    assert [f.feature_id for f in catalog.popular_features(AttributeType.GENRE, 1)] == ["g2"]
    assert [f.feature_id for f in catalog.popular_features(AttributeType.GENRE, 3)] == [
        "g2",
        "g1",
        "g3",
    ]
    # n larger than the population returns everything.
    assert len(catalog.popular_features(AttributeType.GENRE, 50)) == 3


def test_duplicate_item_id_rejected(tmp_path):
    path = tmp_path / "catalog.csv"
    write_csv(path, HEADER, [row("i1", "One", genre="g1:Action"), row("i1", "Dup", genre="g1:Action")])
    with pytest.raises(IntegrityError, match="duplicate item_id"):
        load_catalog(path)


def test_write_catalog_round_trip(tmp_path, mini_files):
    catalog = load_catalog(mini_files["catalog"])
    out = tmp_path / "copy.csv"
    write_catalog(catalog, out)
    assert load_catalog(out) == catalog
