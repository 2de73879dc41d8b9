"""Video resource validation, automatic replacement, and alternatives search.

Two deliberately separate rankings: automatic replacement sorts candidates by
rating (views, then id, as tie-breakers), while the alternatives panel ranks
by relevance. Both are deterministic for a given catalog state.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol, Sequence

import httpx

from .errors import CatalogTransportError, NotFoundError, PreconditionError
from .model import (
    BackgroundLevel,
    Resource,
    StudyPlan,
    day_with_resources,
    plans_equal,
)

ENV_CATALOG_API_KEY = "PLANGLOW_CATALOG_API_KEY"

LOOKUP_BATCH_LIMIT = 50
ALTERNATIVES_MAX = 10

_LEVEL_TAGS = frozenset(level.value for level in BackgroundLevel)


@dataclass(frozen=True)
class CatalogRecord:
    external_id: str
    title: str
    url: str
    duration_seconds: int
    views: int
    likes: int
    description: str
    topics: tuple[str, ...] = ()
    rating: float = 0.0
    available: bool = True


@dataclass(frozen=True)
class AlternativeQuery:
    topic: str
    background_level: BackgroundLevel
    max_duration_seconds: int
    limit: int = ALTERNATIVES_MAX

    def __post_init__(self):
        if not self.topic.strip():
            raise PreconditionError("alternatives query topic must be non-empty")
        if self.max_duration_seconds < 1:
            raise PreconditionError("max_duration_seconds must be positive")
        if not 1 <= self.limit <= ALTERNATIVES_MAX:
            raise PreconditionError(f"limit must be in 1..{ALTERNATIVES_MAX}")


@dataclass(frozen=True)
class RankedCandidate:
    record: CatalogRecord
    relevance: float
    rank: int


@dataclass(frozen=True)
class ReplacementRecord:
    """Outcome of one auto-replacement attempt, addressed by resource path."""

    path: str
    original_id: str
    replacement_id: str | None
    note: str


class Catalog(Protocol):
    def lookup(self, external_ids: Sequence[str]) -> dict[str, CatalogRecord]: ...

    def search(self, topic: str) -> list[tuple[CatalogRecord, float | None]]: ...


def tokenize(text: str) -> set[str]:
    return set(re.findall(r"[a-z0-9]+", text.lower()))


def lexical_relevance(topic: str, record: CatalogRecord) -> float:
    """Fraction of topic tokens found in the record's text; 0..1."""
    topic_tokens = tokenize(topic)
    if not topic_tokens:
        return 0.0
    doc_tokens = tokenize(
        " ".join((record.title, record.description, " ".join(record.topics)))
    )
    return len(topic_tokens & doc_tokens) / len(topic_tokens)


def level_appropriate(record: CatalogRecord, level: BackgroundLevel) -> bool:
    """Soft filter: only constrains records that carry explicit level tags."""
    tags = {t.lower() for t in record.topics} & _LEVEL_TAGS
    if not tags:
        return True
    return level.value in tags


def replacement_key(record: CatalogRecord):
    """Ascending sort key putting the best replacement first.

    Ordering: rating descending, then views descending, then external_id
    ascending as the final deterministic tie-breaker.
    """
    return (-record.rating, -record.views, record.external_id)


class MockCatalog:
    """In-memory catalog over a fixed record set; loadable from a JSON file."""

    def __init__(self, records: Sequence[CatalogRecord]):
        self._by_id = {r.external_id: r for r in records}

    @classmethod
    def from_file(cls, path: str | Path) -> "MockCatalog":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CatalogTransportError(f"cannot read catalog {path}: {exc}") from exc
        records = [
            CatalogRecord(
                external_id=item["external_id"],
                title=item["title"],
                url=item["url"],
                duration_seconds=item["duration_seconds"],
                views=item["views"],
                likes=item["likes"],
                description=item["description"],
                topics=tuple(item.get("topics", ())),
                rating=float(item.get("rating", 0.0)),
                available=bool(item.get("available", True)),
            )
            for item in payload
        ]
        return cls(records)

    @property
    def records(self) -> list[CatalogRecord]:
        return list(self._by_id.values())

    def lookup(self, external_ids: Sequence[str]) -> dict[str, CatalogRecord]:
        return {eid: self._by_id[eid] for eid in external_ids if eid in self._by_id}

    def search(self, topic: str) -> list[tuple[CatalogRecord, float | None]]:
        topic_tokens = tokenize(topic)
        out = []
        for record in self._by_id.values():
            if not record.available:
                continue
            doc_tokens = tokenize(
                " ".join((record.title, record.description, " ".join(record.topics)))
            )
            if topic_tokens & doc_tokens:
                out.append((record, None))
        return out


def _refreshed_from(resource: Resource, record: CatalogRecord) -> Resource:
    return replace(
        resource,
        title=record.title,
        url=record.url,
        duration_seconds=record.duration_seconds,
        views=record.views,
        likes=record.likes,
        description=record.description,
        status="valid",
    )


def validate_resource(resource: Resource, catalog: Catalog) -> Resource:
    """Set a resource's status from the catalog, refreshing metadata on hit."""
    if resource.kind != "video":
        raise PreconditionError(f"only video resources can be validated, got {resource.kind!r}")
    record = catalog.lookup([resource.external_id]).get(resource.external_id)
    if record is None or not record.available:
        return replace(resource, status="invalid")
    return _refreshed_from(resource, record)


def _replacement_resource(record: CatalogRecord, original_id: str) -> Resource:
    return Resource(
        kind="video",
        external_id=record.external_id,
        url=record.url,
        title=record.title,
        duration_seconds=record.duration_seconds,
        views=record.views,
        likes=record.likes,
        description=record.description,
        status="replaced",
        provenance=original_id,
    )


def qualifying_candidates(
    catalog: Catalog,
    topic: str,
    level: BackgroundLevel,
    budget_seconds: int,
) -> list[CatalogRecord]:
    """Search hits that fit the day budget and the learner's level."""
    out = []
    for record, _score in catalog.search(topic):
        if not record.available:
            continue
        if record.duration_seconds > budget_seconds:
            continue
        if not level_appropriate(record, level):
            continue
        out.append(record)
    return out


def auto_replace(
    plan: StudyPlan, catalog: Catalog
) -> tuple[StudyPlan, list[ReplacementRecord]]:
    """Validate every resource and swap invalid ones for the best candidate.

    The duration budget for a replacement is the day's remaining time:
    daily_minutes*60 minus the current durations of the day's other
    resources. Resources with no qualifying candidate stay invalid and are
    reported. The version is bumped iff anything changed.
    """
    all_ids = [
        res.external_id
        for week in plan.weeks
        for day in week.days
        for res in day.resources
    ]
    found = catalog.lookup(all_ids)
    budget_seconds = plan.profile.daily_minutes * 60

    records: list[ReplacementRecord] = []
    new_weeks = []
    for i, week in enumerate(plan.weeks):
        new_days = []
        for j, day in enumerate(week.days):
            working: list[Resource] = []
            invalid_slots = []
            for k, res in enumerate(day.resources):
                record = found.get(res.external_id)
                if record is not None and record.available:
                    working.append(_refreshed_from(res, record))
                else:
                    working.append(replace(res, status="invalid"))
                    invalid_slots.append(k)
            for k in invalid_slots:
                path = f"weeks[{i}].days[{j}].resources[{k}]"
                original = working[k]
                others = sum(
                    r.duration_seconds for n, r in enumerate(working) if n != k
                )
                candidates = qualifying_candidates(
                    catalog,
                    day.topic,
                    plan.profile.background_level,
                    budget_seconds - others,
                )
                if not candidates:
                    records.append(
                        ReplacementRecord(
                            path, original.external_id, None, "no qualifying candidate"
                        )
                    )
                    continue
                best = min(candidates, key=replacement_key)
                working[k] = _replacement_resource(best, original.external_id)
                records.append(
                    ReplacementRecord(
                        path, original.external_id, best.external_id, "replaced"
                    )
                )
            new_days.append(day_with_resources(day, working))
        new_weeks.append(replace(week, days=tuple(new_days)))

    new_plan = replace(plan, weeks=tuple(new_weeks))
    if not plans_equal(plan, new_plan):
        new_plan = replace(new_plan, version=plan.version + 1)
    return new_plan, records


def search_alternatives(
    query: AlternativeQuery, catalog: Catalog
) -> list[RankedCandidate]:
    """Up to ``limit`` available candidates, ranked by relevance.

    Relevance is the catalog's own score when supplied, else the lexical
    token-overlap score; ties break by views then external_id.
    """
    scored = []
    for record, score in catalog.search(query.topic):
        if not record.available:
            continue
        if record.duration_seconds > query.max_duration_seconds:
            continue
        if not level_appropriate(record, query.background_level):
            continue
        relevance = score if score is not None else lexical_relevance(query.topic, record)
        relevance = min(1.0, max(0.0, relevance))
        scored.append((record, relevance))
    scored.sort(key=lambda pair: (-pair[1], -pair[0].views, pair[0].external_id))
    return [
        RankedCandidate(record=record, relevance=relevance, rank=n + 1)
        for n, (record, relevance) in enumerate(scored[: query.limit])
    ]


def replace_resource(
    plan: StudyPlan,
    week_index: int,
    day_index: int,
    old_external_id: str,
    new_record: CatalogRecord,
    *,
    now: str | None = None,
) -> StudyPlan:
    """Swap one addressed resource for a catalog record chosen by the user.

    ``week_index``/``day_index`` are the 1-based plan indices. Exactly one
    resource changes (plus the day's recomputed estimate); the version is
    incremented and ``updated_at`` set when ``now`` is given.
    """
    if not new_record.available:
        raise PreconditionError(
            f"replacement {new_record.external_id!r} is not available"
        )
    week_pos = next(
        (i for i, w in enumerate(plan.weeks) if w.index == week_index), None
    )
    if week_pos is None:
        raise NotFoundError(f"no week with index {week_index}")
    week = plan.weeks[week_pos]
    day_pos = next((j for j, d in enumerate(week.days) if d.index == day_index), None)
    if day_pos is None:
        raise NotFoundError(f"no day with index {day_index} in week {week_index}")
    day = week.days[day_pos]
    slot = next(
        (k for k, r in enumerate(day.resources) if r.external_id == old_external_id),
        None,
    )
    if slot is None:
        raise NotFoundError(
            f"resource {old_external_id!r} not found in week {week_index} "
            f"day {day_index}"
        )
    new_resource = replace(
        _replacement_resource(new_record, old_external_id), status="valid"
    )
    resources = list(day.resources)
    resources[slot] = new_resource
    new_day = day_with_resources(day, resources)
    new_days = list(week.days)
    new_days[day_pos] = new_day
    new_weeks = list(plan.weeks)
    new_weeks[week_pos] = replace(week, days=tuple(new_days))
    out = replace(plan, weeks=tuple(new_weeks), version=plan.version + 1)
    if now is not None:
        out = replace(out, updated_at=now)
    return out


# ---------------------------------------------------------------------------
# live adapter
# ---------------------------------------------------------------------------

_ISO_DURATION_RE = re.compile(
    r"PT(?:(?P<h>\d+)H)?(?:(?P<m>\d+)M)?(?:(?P<s>\d+)S)?"
)


def _parse_iso_duration(value: str) -> int:
    match = _ISO_DURATION_RE.fullmatch(value or "")
    if not match:
        return 0
    hours = int(match.group("h") or 0)
    minutes = int(match.group("m") or 0)
    seconds = int(match.group("s") or 0)
    return hours * 3600 + minutes * 60 + seconds


class YouTubeCatalog:
    """YouTube Data v3 adapter: batched id lookups plus relevance search.

    The platform exposes likes rather than star ratings, so the replacement
    rating is derived as likes/views clamped to the 0..5 scale; it is only
    ever used as an ordering key.
    """

    BASE_URL = "https://www.googleapis.com/youtube/v3"

    def __init__(
        self,
        api_key: str | None = None,
        *,
        transport: httpx.BaseTransport | None = None,
    ):
        self._api_key = api_key or os.environ.get(ENV_CATALOG_API_KEY, "")
        if not self._api_key:
            raise CatalogTransportError(f"{ENV_CATALOG_API_KEY} is not set")
        self._client = httpx.Client(
            base_url=self.BASE_URL, timeout=30.0, transport=transport
        )

    def _get(self, path: str, params: dict) -> dict:
        try:
            response = self._client.get(
                path, params={**params, "key": self._api_key}
            )
        except httpx.TransportError as exc:
            raise CatalogTransportError(f"catalog unreachable: {exc}") from exc
        if response.status_code != 200:
            raise CatalogTransportError(
                f"catalog returned {response.status_code}: {response.text[:200]}"
            )
        return response.json()

    def _record_from_item(self, item: dict) -> CatalogRecord:
        video_id = item["id"] if isinstance(item["id"], str) else item["id"]["videoId"]
        snippet = item.get("snippet", {})
        stats = item.get("statistics", {})
        status = item.get("status", {})
        views = int(stats.get("viewCount", 0))
        likes = int(stats.get("likeCount", 0))
        available = (
            status.get("privacyStatus", "public") == "public"
            and status.get("embeddable", True)
            and not item.get("_missing", False)
        )
        return CatalogRecord(
            external_id=video_id,
            title=snippet.get("title", ""),
            url=f"https://www.youtube.com/watch?v={video_id}",
            duration_seconds=_parse_iso_duration(
                item.get("contentDetails", {}).get("duration", "")
            ),
            views=views,
            likes=likes,
            description=snippet.get("description", ""),
            topics=tuple(snippet.get("tags", ()) or ()),
            rating=min(5.0, likes / views) if views else 0.0,
            available=available,
        )

    def lookup(self, external_ids: Sequence[str]) -> dict[str, CatalogRecord]:
        out: dict[str, CatalogRecord] = {}
        unique = list(dict.fromkeys(external_ids))
        for start in range(0, len(unique), LOOKUP_BATCH_LIMIT):
            chunk = unique[start : start + LOOKUP_BATCH_LIMIT]
            body = self._get(
                "/videos",
                {
                    "part": "snippet,contentDetails,statistics,status",
                    "id": ",".join(chunk),
                    "maxResults": LOOKUP_BATCH_LIMIT,
                },
            )
            for item in body.get("items", ()):
                record = self._record_from_item(item)
                out[record.external_id] = record
        return out

    def search(self, topic: str) -> list[tuple[CatalogRecord, float | None]]:
        body = self._get(
            "/search",
            {"part": "snippet", "q": topic, "type": "video", "maxResults": 25},
        )
        ids = [
            item["id"]["videoId"]
            for item in body.get("items", ())
            if isinstance(item.get("id"), dict) and "videoId" in item["id"]
        ]
        details = self.lookup(ids)
        # The platform returns relevance order, not scores; synthesize a
        # descending score so its ordering wins over the lexical fallback.
        total = len(ids) or 1
        out = []
        for n, video_id in enumerate(ids):
            record = details.get(video_id)
            if record is None or not record.available:
                continue
            out.append((record, (total - n) / total))
        return out
