"""HTTP/JSON service backing the preference-collection UI.

Sessions walk a strict state machine (collecting -> testing -> submitted).
The consistency test shows every true favourite of the tested kinds mixed
with an equal number of popular decoys per kind, shuffled with a per-session
seed so a reloaded client sees the identical sheet.  Submitted sessions are
appended to the same CSV files the offline toolkit loads; appends are
serialized globally so concurrent submissions never interleave rows.
"""

from __future__ import annotations

import csv
import random
import threading
import uuid
from dataclasses import dataclass, field as dc_field
from enum import Enum
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .catalog import AttributeType, Catalog
from .interactions import (
    ConsistencyTrial,
    FavouriteKind,
    Gender,
    ReliabilityPolicy,
    Source,
    precision_of_trials,
)

# Kinds shown during the consistency test: movies, genres, and actors.
TESTED_KINDS = ("item", AttributeType.GENRE.value, AttributeType.ACTOR.value)


class SessionState(str, Enum):
    COLLECTING = "collecting"
    TESTING = "testing"
    SUBMITTED = "submitted"


@dataclass
class SheetEntry:
    kind: str  # "item" or "feature"
    target_id: str
    label: str
    is_true_favourite: bool


@dataclass
class Session:
    session_id: str
    source: Source
    age_range: str
    gender: str
    country: str
    seed: int
    state: SessionState = SessionState.COLLECTING
    favourites: list[tuple[str, str]] = dc_field(default_factory=list)  # (kind, target_id)
    sheet: list[SheetEntry] | None = None
    precision: float | None = None
    reliable: bool | None = None


@dataclass(frozen=True)
class StorePaths:
    users: Path
    favourites: Path
    trials: Path


def _append_rows(path: Path, header: list[str], rows: list[list[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not path.exists() or path.stat().st_size == 0
    with open(path, "a", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if fresh:
            writer.writerow(header)
        writer.writerows(rows)


class SessionStore:
    """In-memory sessions plus append-only persistence to the CSV files."""

    def __init__(
        self,
        catalog: Catalog,
        paths: StorePaths,
        policy: ReliabilityPolicy,
        decoys_per_true: int = 1,
    ) -> None:
        self.catalog = catalog
        self.paths = paths
        self.policy = policy
        self.decoys_per_true = decoys_per_true
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._seed_rng = random.Random()

    def create(self, source: Source, age_range: str, gender: str, country: str) -> Session:
        session = Session(
            session_id=uuid.uuid4().hex,
            source=source,
            age_range=age_range,
            gender=gender,
            country=country,
            seed=self._seed_rng.getrandbits(32),
        )
        with self._lock:
            self.sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def category_counts(self, session: Session) -> dict[str, int]:
        counts = {key: 0 for key in self.policy.minimums}
        for kind, target_id in session.favourites:
            if kind == "item":
                key = "item"
            else:
                key = self.catalog.features[target_id].attribute_type.value
            counts[key] = counts.get(key, 0) + 1
        return counts

    def minimums_met(self, session: Session) -> bool:
        counts = self.category_counts(session)
        return all(counts.get(key, 0) >= minimum for key, minimum in self.policy.minimums.items())

    def set_favourites(self, session: Session, favourites: list[tuple[str, str]]) -> None:
        if session.state is not SessionState.COLLECTING:
            raise HTTPException(status_code=409, detail=f"session is {session.state.value}")
        deduped: list[tuple[str, str]] = []
        seen: set[tuple[str, str]] = set()
        for kind, target_id in favourites:
            if kind == "item":
                if target_id not in self.catalog.items:
                    raise HTTPException(status_code=422, detail=f"unknown item {target_id!r}")
            else:
                if target_id not in self.catalog.features:
                    raise HTTPException(status_code=422, detail=f"unknown feature {target_id!r}")
            pair = (kind, target_id)
            if pair not in seen:
                seen.add(pair)
                deduped.append(pair)
        session.favourites = deduped

    def _true_favourites_by_kind(self, session: Session) -> dict[str, list[tuple[str, str]]]:
        grouped: dict[str, list[tuple[str, str]]] = {key: [] for key in TESTED_KINDS}
        for kind, target_id in session.favourites:
            if kind == "item":
                grouped["item"].append((kind, target_id))
            else:
                type_key = self.catalog.features[target_id].attribute_type.value
                if type_key in grouped:
                    grouped[type_key].append((kind, target_id))
        return grouped

    def _decoys(self, kind_key: str, exclude: set[str], need: int, rng: random.Random) -> list[tuple[str, str]]:
        if need < 1:
            return []
        if kind_key == "item":
            pool = [
                ("item", item.item_id)
                for item in self.catalog.popular_items(len(self.catalog.items))
                if item.item_id not in exclude
            ]
        else:
            attribute_type = AttributeType(kind_key)
            population = len(self.catalog.features_of_type(attribute_type))
            if population == 0:
                return []
            pool = [
                ("feature", feature.feature_id)
                for feature in self.catalog.popular_features(attribute_type, population)
                if feature.feature_id not in exclude
            ]
        # Sample from the popular half of the pool so decoys stay plausible.
        window = pool[: max(need * 4, 20)]
        if len(window) <= need:
            return window
        return rng.sample(window, need)

    def begin_test(self, session: Session) -> list[SheetEntry]:
        if session.state is SessionState.SUBMITTED:
            raise HTTPException(status_code=409, detail="session already submitted")
        if session.state is SessionState.TESTING:
            assert session.sheet is not None
            return session.sheet
        if not self.minimums_met(session):
            raise HTTPException(
                status_code=422,
                detail={"error": "minimum favourites not met", "counts": self.category_counts(session),
                        "minimums": dict(self.policy.minimums)},
            )
        rng = random.Random(session.seed)
        entries: list[SheetEntry] = []
        for kind_key, trues in self._true_favourites_by_kind(session).items():
            exclude = {target_id for _, target_id in trues}
            decoys = self._decoys(kind_key, exclude, len(trues) * self.decoys_per_true, rng)
            for kind, target_id in trues:
                entries.append(SheetEntry(kind, target_id, self._label(kind, target_id), True))
            for kind, target_id in decoys:
                entries.append(SheetEntry(kind, target_id, self._label(kind, target_id), False))
        rng.shuffle(entries)
        session.sheet = entries
        session.state = SessionState.TESTING
        return entries

    def _label(self, kind: str, target_id: str) -> str:
        if kind == "item":
            return self.catalog.items[target_id].title
        return self.catalog.features[target_id].label

    def submit_test(self, session: Session, selected: list[tuple[str, str]]) -> Session:
        if session.state is not SessionState.TESTING:
            raise HTTPException(status_code=409, detail=f"session is {session.state.value}")
        assert session.sheet is not None
        on_sheet = {(entry.kind, entry.target_id) for entry in session.sheet}
        selected_set = set(selected)
        unknown = selected_set - on_sheet
        if unknown:
            raise HTTPException(
                status_code=422, detail=f"selections not on the sheet: {sorted(unknown)}"
            )
        trials = [
            ConsistencyTrial(
                user_id=session.session_id,
                kind=FavouriteKind(entry.kind),
                target_id=entry.target_id,
                is_true_favourite=entry.is_true_favourite,
                selected=(entry.kind, entry.target_id) in selected_set,
            )
            for entry in session.sheet
        ]
        session.precision = precision_of_trials(trials)
        if session.source is Source.VOLUNTEER:
            session.reliable = self.minimums_met(session)
        else:
            session.reliable = (
                session.precision is not None
                and session.precision >= self.policy.precision_threshold
            )
        self._persist(session, trials)
        session.state = SessionState.SUBMITTED
        return session

    def _persist(self, session: Session, trials: list[ConsistencyTrial]) -> None:
        with self._lock:
            _append_rows(
                self.paths.users,
                ["user_id", "source", "age_range", "gender", "country"],
                [[session.session_id, session.source.value, session.age_range,
                  session.gender, session.country]],
            )
            _append_rows(
                self.paths.favourites,
                ["user_id", "kind", "target_id"],
                [[session.session_id, kind, target_id] for kind, target_id in session.favourites],
            )
            _append_rows(
                self.paths.trials,
                ["user_id", "kind", "target_id", "is_true_favourite", "selected"],
                [
                    [t.user_id, t.kind.value, t.target_id,
                     "true" if t.is_true_favourite else "false",
                     "true" if t.selected else "false"]
                    for t in trials
                ],
            )


class SessionCreate(BaseModel):
    source: Source
    age_range: str = ""
    gender: Gender = Gender.UNSPECIFIED
    country: str = ""


class FavouriteIn(BaseModel):
    kind: str = Field(pattern="^(item|feature)$")
    target_id: str


class FavouritesPut(BaseModel):
    favourites: list[FavouriteIn]


class SubmitTest(BaseModel):
    selections: list[FavouriteIn]


def _session_status(store: SessionStore, session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "state": session.state.value,
        "source": session.source.value,
        "favourites": [{"kind": k, "target_id": t} for k, t in session.favourites],
        "counts": store.category_counts(session),
        "minimums": dict(store.policy.minimums),
        "minimums_met": store.minimums_met(session),
    }


def create_app(
    catalog: Catalog,
    paths: StorePaths,
    policy: ReliabilityPolicy | None = None,
    decoys_per_true: int = 1,
    cors_origins: tuple[str, ...] = ("*",),
    ui_dir: Path | None = None,
) -> FastAPI:
    """Build the FastAPI application around one catalog and store."""
    store = SessionStore(catalog, paths, policy or ReliabilityPolicy(), decoys_per_true)
    app = FastAPI(title="profilebench collection service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["GET", "POST", "PUT"],
        allow_headers=["*"],
    )
    app.state.store = store

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/policy")
    def policy_info():
        return {
            "minimums": dict(store.policy.minimums),
            "precision_threshold": store.policy.precision_threshold,
        }

    @app.get("/api/features")
    def features(type: str, q: str = "", limit: int = 10):
        try:
            attribute_type = AttributeType(type)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown attribute type {type!r}") from None
        if limit < 1:
            raise HTTPException(status_code=400, detail="limit must be >= 1")
        return [
            {
                "feature_id": f.feature_id,
                "label": f.label,
                "doc_freq": catalog.doc_freq[f.feature_id],
            }
            for f in catalog.search_features(attribute_type, q, limit)
        ]

    @app.get("/api/items")
    def items(q: str = "", limit: int = 10):
        if limit < 1:
            raise HTTPException(status_code=400, detail="limit must be >= 1")
        return [{"item_id": i.item_id, "title": i.title} for i in catalog.search_items(q, limit)]

    @app.post("/api/sessions", status_code=201)
    def create_session(body: SessionCreate):
        session = store.create(
            body.source,
            body.age_range.strip(),
            body.gender.value,
            body.country.strip(),
        )
        return _session_status(store, session)

    @app.get("/api/sessions/{session_id}")
    def session_status(session_id: str):
        return _session_status(store, store.get(session_id))

    @app.put("/api/sessions/{session_id}/favourites")
    def put_favourites(session_id: str, body: FavouritesPut):
        session = store.get(session_id)
        store.set_favourites(session, [(f.kind, f.target_id) for f in body.favourites])
        return _session_status(store, session)

    @app.post("/api/sessions/{session_id}/begin-test")
    def begin_test(session_id: str):
        session = store.get(session_id)
        sheet = store.begin_test(session)
        return {
            "session_id": session.session_id,
            "state": session.state.value,
            "sheet": [
                {"kind": entry.kind, "target_id": entry.target_id, "label": entry.label}
                for entry in sheet
            ],
        }

    @app.post("/api/sessions/{session_id}/submit-test")
    def submit_test(session_id: str, body: SubmitTest):
        session = store.get(session_id)
        store.submit_test(session, [(f.kind, f.target_id) for f in body.selections])
        return {
            "session_id": session.session_id,
            "state": session.state.value,
            "user_id": session.session_id,
            "precision": session.precision,
            "reliable": session.reliable,
        }

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
