"""Plan document model: types, invariants, canonical serialization, diffing.

The interchange format is canonical UTF-8 JSON (sorted keys, compact
separators, single trailing LF) tagged ``"schema": "planglow/1"``, so equal
plans always produce byte-identical documents. Timestamps and ``version`` are
engine-managed and excluded from structural equality / diffs.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterator
from urllib.parse import urlsplit

from .errors import PlanParseError, PlanSchemaError

SCHEMA_TAG = "planglow/1"

DAYS_PER_WEEK_DEFAULT = 5
MAX_DURATION_WEEKS = 52
MIN_DAILY_MINUTES = 10
MAX_DAILY_MINUTES = 960

RESOURCE_STATUSES = ("valid", "invalid", "replaced")


class BackgroundLevel(enum.Enum):
    """Six-step expertise scale, totally ordered from novice to mastery."""

    NOVICE = "novice"
    ADVANCED_BEGINNER = "advanced_beginner"
    COMPETENCE = "competence"
    PROFICIENCY = "proficiency"
    EXPERTISE = "expertise"
    MASTERY = "mastery"

    @property
    def rank(self) -> int:
        return list(BackgroundLevel).index(self)

    def __lt__(self, other: "BackgroundLevel") -> bool:
        return self.rank < other.rank

    def __le__(self, other: "BackgroundLevel") -> bool:
        return self.rank <= other.rank

    def __gt__(self, other: "BackgroundLevel") -> bool:
        return self.rank > other.rank

    def __ge__(self, other: "BackgroundLevel") -> bool:
        return self.rank >= other.rank


class BloomLevel(enum.Enum):
    """Objective depth tags; remember/understand are foundational."""

    REMEMBER = "remember"
    UNDERSTAND = "understand"
    APPLY = "apply"
    ANALYZE = "analyze"
    EVALUATE = "evaluate"
    CREATE = "create"


FOUNDATIONAL_BLOOM = frozenset({BloomLevel.REMEMBER, BloomLevel.UNDERSTAND})
HIGHER_BLOOM = frozenset(set(BloomLevel) - FOUNDATIONAL_BLOOM)
EVALUATE_OR_ABOVE = frozenset({BloomLevel.EVALUATE, BloomLevel.CREATE})


@dataclass(frozen=True)
class LearnerProfile:
    subject: str
    goal: str
    background_level: BackgroundLevel
    duration_weeks: int
    daily_minutes: int
    preferred_media: tuple[str, ...] | None = None


@dataclass(frozen=True)
class LearningObjective:
    text: str
    bloom_level: BloomLevel


@dataclass(frozen=True)
class Resource:
    """A single study resource (video in v1) with catalog metadata.

    ``provenance`` holds the original external_id after an automatic or
    manual replacement and survives later re-validation.
    """

    kind: str
    external_id: str
    url: str
    title: str
    duration_seconds: int
    views: int
    likes: int
    description: str
    status: str
    provenance: str | None = None


@dataclass(frozen=True)
class DayPlan:
    index: int
    topic: str
    topic_rationale: str
    objectives: tuple[LearningObjective, ...]
    resources: tuple[Resource, ...]
    estimated_minutes: int


@dataclass(frozen=True)
class WeekPlan:
    index: int
    title: str
    objectives: tuple[LearningObjective, ...]
    content_rationale: str
    connections: str
    days: tuple[DayPlan, ...]


@dataclass(frozen=True)
class StudyPlan:
    plan_id: str
    version: int
    profile: LearnerProfile
    weeks: tuple[WeekPlan, ...]
    days_per_week: int = DAYS_PER_WEEK_DEFAULT
    created_at: str = ""
    updated_at: str = ""


@dataclass(frozen=True)
class Violation:
    """One invariant failure, addressed by a path into the document."""

    path: str
    message: str


@dataclass(frozen=True)
class PlanChange:
    """One structural difference between two plans."""

    path: str
    before: Any
    after: Any


def estimated_minutes_for(resources) -> int:
    """Day budget heuristic: total resource seconds rounded up to minutes."""
    total = sum(r.duration_seconds for r in resources)
    return math.ceil(total / 60) if total else 0


def day_with_resources(day: DayPlan, resources) -> DayPlan:
    """Replace a day's resources, recomputing its estimated minutes."""
    resources = tuple(resources)
    return replace(
        day, resources=resources, estimated_minutes=estimated_minutes_for(resources)
    )


def _is_absolute_url(url: str) -> bool:
    parts = urlsplit(url)
    return bool(parts.scheme) and bool(parts.netloc)


def validate_profile(profile: LearnerProfile, path: str = "profile") -> list[Violation]:
    out: list[Violation] = []
    if not profile.subject.strip():
        out.append(Violation(f"{path}.subject", "subject must be non-empty"))
    if not profile.goal.strip():
        out.append(Violation(f"{path}.goal", "goal must be non-empty"))
    if not 1 <= profile.duration_weeks <= MAX_DURATION_WEEKS:
        out.append(
            Violation(
                f"{path}.duration_weeks",
                f"duration_weeks must be in 1..{MAX_DURATION_WEEKS}, "
                f"got {profile.duration_weeks}",
            )
        )
    if not MIN_DAILY_MINUTES <= profile.daily_minutes <= MAX_DAILY_MINUTES:
        out.append(
            Violation(
                f"{path}.daily_minutes",
                f"daily_minutes must be in {MIN_DAILY_MINUTES}..{MAX_DAILY_MINUTES}, "
                f"got {profile.daily_minutes}",
            )
        )
    return out


def _validate_objectives(objectives, path: str) -> list[Violation]:
    out: list[Violation] = []
    if not objectives:
        out.append(Violation(path, "at least one learning objective is required"))
    for i, obj in enumerate(objectives):
        if not obj.text.strip():
            out.append(Violation(f"{path}[{i}].text", "objective text must be non-empty"))
    return out


def _validate_resource(res: Resource, path: str) -> list[Violation]:
    out: list[Violation] = []
    if not res.kind.strip():
        out.append(Violation(f"{path}.kind", "kind must be non-empty"))
    if not res.external_id.strip():
        out.append(Violation(f"{path}.external_id", "external_id must be non-empty"))
    if not _is_absolute_url(res.url):
        out.append(Violation(f"{path}.url", f"url must be absolute, got {res.url!r}"))
    if res.duration_seconds < 0:
        out.append(Violation(f"{path}.duration_seconds", "must be non-negative"))
    if res.views < 0:
        out.append(Violation(f"{path}.views", "must be non-negative"))
    if res.likes < 0:
        out.append(Violation(f"{path}.likes", "must be non-negative"))
    if res.status not in RESOURCE_STATUSES:
        out.append(
            Violation(
                f"{path}.status",
                f"status must be one of {RESOURCE_STATUSES}, got {res.status!r}",
            )
        )
    elif res.status == "replaced" and not res.provenance:
        out.append(
            Violation(
                f"{path}.provenance",
                "replaced resources must carry the original external_id",
            )
        )
    return out


def _validate_day(day: DayPlan, days_per_week: int, path: str) -> list[Violation]:
    out: list[Violation] = []
    if not 1 <= day.index <= days_per_week:
        out.append(
            Violation(f"{path}.index", f"day index must be in 1..{days_per_week}")
        )
    if not day.topic.strip():
        out.append(Violation(f"{path}.topic", "topic must be non-empty"))
    out.extend(_validate_objectives(day.objectives, f"{path}.objectives"))
    for k, res in enumerate(day.resources):
        out.extend(_validate_resource(res, f"{path}.resources[{k}]"))
    expected = estimated_minutes_for(day.resources)
    if day.estimated_minutes != expected:
        out.append(
            Violation(
                f"{path}.estimated_minutes",
                f"must equal resource durations rounded up to minutes "
                f"({expected}), got {day.estimated_minutes}",
            )
        )
    return out


def _validate_week(week: WeekPlan, days_per_week: int, path: str) -> list[Violation]:
    out: list[Violation] = []
    if not week.title.strip():
        out.append(Violation(f"{path}.title", "title must be non-empty"))
    out.extend(_validate_objectives(week.objectives, f"{path}.objectives"))
    if not week.content_rationale.strip():
        out.append(Violation(f"{path}.content_rationale", "must be non-empty"))
    if not week.connections.strip():
        out.append(Violation(f"{path}.connections", "must be non-empty"))
    if len(week.days) != days_per_week:
        out.append(
            Violation(
                f"{path}.days",
                f"expected {days_per_week} days, got {len(week.days)}",
            )
        )
    for j, day in enumerate(week.days):
        if day.index != j + 1:
            out.append(
                Violation(
                    f"{path}.days[{j}].index",
                    f"day indices must be contiguous from 1; expected {j + 1}, "
                    f"got {day.index}",
                )
            )
        out.extend(_validate_day(day, days_per_week, f"{path}.days[{j}]"))
    return out


def validate_plan(plan: StudyPlan) -> list[Violation]:
    """Check every plan invariant; an empty list means the plan is valid.

    Violations are data, not errors: each carries a list-index path such as
    ``weeks[1].days[3].objectives`` and a message.
    """
    out: list[Violation] = []
    if not plan.plan_id.strip():
        out.append(Violation("plan_id", "plan_id must be non-empty"))
    if plan.version < 1:
        out.append(Violation("version", f"version must be >= 1, got {plan.version}"))
    if plan.days_per_week < 1:
        out.append(Violation("days_per_week", "must be a positive integer"))
    out.extend(validate_profile(plan.profile))
    if len(plan.weeks) != plan.profile.duration_weeks:
        out.append(
            Violation(
                "weeks",
                f"expected {plan.profile.duration_weeks} weeks "
                f"(profile duration), got {len(plan.weeks)}",
            )
        )
    for i, week in enumerate(plan.weeks):
        if week.index != i + 1:
            out.append(
                Violation(
                    f"weeks[{i}].index",
                    f"week indices must be contiguous from 1; expected {i + 1}, "
                    f"got {week.index}",
                )
            )
        out.extend(_validate_week(week, plan.days_per_week, f"weeks[{i}]"))
    return out


# ---------------------------------------------------------------------------
# dict <-> dataclass conversion
# ---------------------------------------------------------------------------


def profile_to_dict(profile: LearnerProfile) -> dict:
    out = {
        "subject": profile.subject,
        "goal": profile.goal,
        "background_level": profile.background_level.value,
        "duration_weeks": profile.duration_weeks,
        "daily_minutes": profile.daily_minutes,
    }
    if profile.preferred_media is not None:
        out["preferred_media"] = list(profile.preferred_media)
    return out


def _objective_to_dict(obj: LearningObjective) -> dict:
    return {"text": obj.text, "bloom_level": obj.bloom_level.value}


def _resource_to_dict(res: Resource) -> dict:
    out = {
        "kind": res.kind,
        "external_id": res.external_id,
        "url": res.url,
        "title": res.title,
        "duration_seconds": res.duration_seconds,
        "views": res.views,
        "likes": res.likes,
        "description": res.description,
        "status": res.status,
    }
    if res.provenance is not None:
        out["provenance"] = res.provenance
    return out


def plan_to_dict(plan: StudyPlan) -> dict:
    return {
        "schema": SCHEMA_TAG,
        "plan_id": plan.plan_id,
        "version": plan.version,
        "profile": profile_to_dict(plan.profile),
        "days_per_week": plan.days_per_week,
        "created_at": plan.created_at,
        "updated_at": plan.updated_at,
        "weeks": [
            {
                "index": w.index,
                "title": w.title,
                "objectives": [_objective_to_dict(o) for o in w.objectives],
                "content_rationale": w.content_rationale,
                "connections": w.connections,
                "days": [
                    {
                        "index": d.index,
                        "topic": d.topic,
                        "topic_rationale": d.topic_rationale,
                        "objectives": [_objective_to_dict(o) for o in d.objectives],
                        "resources": [_resource_to_dict(r) for r in d.resources],
                        "estimated_minutes": d.estimated_minutes,
                    }
                    for d in w.days
                ],
            }
            for w in plan.weeks
        ],
    }


class _Reader:
    """Typed field extraction with path-tracked schema errors."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise PlanSchemaError(path or "<root>", "expected an object")
        self.data = data
        self.path = path

    def _at(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def require(self, key: str) -> Any:
        if key not in self.data:
            raise PlanSchemaError(self._at(key), "missing required field")
        return self.data[key]

    def str_(self, key: str) -> str:
        value = self.require(key)
        if not isinstance(value, str):
            raise PlanSchemaError(self._at(key), f"expected string, got {type(value).__name__}")
        return value

    def int_(self, key: str) -> int:
        value = self.require(key)
        if not isinstance(value, int) or isinstance(value, bool):
            raise PlanSchemaError(self._at(key), f"expected integer, got {type(value).__name__}")
        return value

    def list_(self, key: str) -> list:
        value = self.require(key)
        if not isinstance(value, list):
            raise PlanSchemaError(self._at(key), f"expected array, got {type(value).__name__}")
        return value

    def items(self, key: str) -> Iterator[tuple[str, Any]]:
        for i, item in enumerate(self.list_(key)):
            yield f"{self._at(key)}[{i}]", item


def profile_from_dict(data: Any, path: str = "profile") -> LearnerProfile:
    r = _Reader(data, path)
    level_raw = r.str_("background_level")
    try:
        level = BackgroundLevel(level_raw)
    except ValueError:
        raise PlanSchemaError(
            f"{path}.background_level",
            f"unknown background level {level_raw!r}",
        ) from None
    preferred = None
    if "preferred_media" in r.data:
        raw = r.list_("preferred_media")
        for i, tag in enumerate(raw):
            if not isinstance(tag, str):
                raise PlanSchemaError(f"{path}.preferred_media[{i}]", "expected string")
        preferred = tuple(raw)
    return LearnerProfile(
        subject=r.str_("subject"),
        goal=r.str_("goal"),
        background_level=level,
        duration_weeks=r.int_("duration_weeks"),
        daily_minutes=r.int_("daily_minutes"),
        preferred_media=preferred,
    )


def _objective_from_dict(data: Any, path: str) -> LearningObjective:
    r = _Reader(data, path)
    bloom_raw = r.str_("bloom_level")
    try:
        bloom = BloomLevel(bloom_raw)
    except ValueError:
        raise PlanSchemaError(
            f"{path}.bloom_level", f"unknown bloom level {bloom_raw!r}"
        ) from None
    return LearningObjective(text=r.str_("text"), bloom_level=bloom)


def _resource_from_dict(data: Any, path: str) -> Resource:
    r = _Reader(data, path)
    provenance = None
    if "provenance" in r.data:
        provenance = r.str_("provenance")
    return Resource(
        kind=r.str_("kind"),
        external_id=r.str_("external_id"),
        url=r.str_("url"),
        title=r.str_("title"),
        duration_seconds=r.int_("duration_seconds"),
        views=r.int_("views"),
        likes=r.int_("likes"),
        description=r.str_("description"),
        status=r.str_("status"),
        provenance=provenance,
    )


def _day_from_dict(data: Any, path: str) -> DayPlan:
    r = _Reader(data, path)
    return DayPlan(
        index=r.int_("index"),
        topic=r.str_("topic"),
        topic_rationale=r.str_("topic_rationale"),
        objectives=tuple(_objective_from_dict(d, p) for p, d in r.items("objectives")),
        resources=tuple(_resource_from_dict(d, p) for p, d in r.items("resources")),
        estimated_minutes=r.int_("estimated_minutes"),
    )


def _week_from_dict(data: Any, path: str) -> WeekPlan:
    r = _Reader(data, path)
    return WeekPlan(
        index=r.int_("index"),
        title=r.str_("title"),
        objectives=tuple(_objective_from_dict(d, p) for p, d in r.items("objectives")),
        content_rationale=r.str_("content_rationale"),
        connections=r.str_("connections"),
        days=tuple(_day_from_dict(d, p) for p, d in r.items("days")),
    )


def plan_from_dict(data: Any) -> StudyPlan:
    """Build a StudyPlan from a parsed document, checking schema and invariants.

    Raises PlanSchemaError naming the first offending path; semantic invariant
    failures carry the full violation list for the repair path.
    """
    r = _Reader(data, "")
    tag = r.str_("schema")
    if tag != SCHEMA_TAG:
        raise PlanSchemaError("schema", f"expected {SCHEMA_TAG!r}, got {tag!r}")
    plan = StudyPlan(
        plan_id=r.str_("plan_id"),
        version=r.int_("version"),
        profile=profile_from_dict(r.require("profile")),
        weeks=tuple(_week_from_dict(d, p) for p, d in r.items("weeks")),
        days_per_week=r.int_("days_per_week"),
        created_at=r.str_("created_at"),
        updated_at=r.str_("updated_at"),
    )
    violations = validate_plan(plan)
    if violations:
        first = violations[0]
        raise PlanSchemaError(first.path, first.message, violations)
    return plan


# ---------------------------------------------------------------------------
# canonical serialization
# ---------------------------------------------------------------------------


def canonical_json(payload: Any) -> str:
    """Canonical JSON text: sorted keys, compact, UTF-8, trailing LF."""
    return (
        json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        + "\n"
    )


def serialize_plan(plan: StudyPlan) -> str:
    """Render the canonical interchange document for a valid plan."""
    violations = validate_plan(plan)
    if violations:
        first = violations[0]
        raise PlanSchemaError(first.path, first.message, violations)
    return canonical_json(plan_to_dict(plan))


def deserialize_plan(document: str | bytes) -> StudyPlan:
    """Parse an interchange document back into a validated StudyPlan."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise PlanParseError(exc.msg, exc.lineno, exc.colno) from exc
    return plan_from_dict(data)


# ---------------------------------------------------------------------------
# diffing
# ---------------------------------------------------------------------------

_EQUALITY_EXCLUDED = ("version", "created_at", "updated_at")


def _comparable_dict(plan: StudyPlan) -> dict:
    data = plan_to_dict(plan)
    for key in _EQUALITY_EXCLUDED:
        data.pop(key, None)
    return data


def _is_resource_node(path: str) -> bool:
    return path.rpartition(".")[2].startswith("resources[")


def _walk_diff(path: str, before: Any, after: Any, out: list[PlanChange]) -> None:
    if isinstance(before, dict) and isinstance(after, dict):
        # A resource whose identity changed reads as one swap, not N field edits.
        if (
            _is_resource_node(path)
            and before.get("external_id") != after.get("external_id")
        ):
            out.append(PlanChange(path, before, after))
            return
        for key in sorted(set(before) | set(after)):
            sub = f"{path}.{key}" if path else key
            if key not in before:
                out.append(PlanChange(sub, None, after[key]))
            elif key not in after:
                out.append(PlanChange(sub, before[key], None))
            else:
                _walk_diff(sub, before[key], after[key], out)
        return
    if isinstance(before, list) and isinstance(after, list):
        for i in range(max(len(before), len(after))):
            sub = f"{path}[{i}]"
            if i >= len(before):
                out.append(PlanChange(sub, None, after[i]))
            elif i >= len(after):
                out.append(PlanChange(sub, before[i], None))
            else:
                _walk_diff(sub, before[i], after[i], out)
        return
    if before != after:
        out.append(PlanChange(path, before, after))


def diff_plans(a: StudyPlan, b: StudyPlan) -> list[PlanChange]:
    """Leaf-level changes from ``a`` to ``b``, ignoring version and timestamps.

    A resource with a different external_id diffs as a single change record at
    the resource path; other nodes diff field by field.
    """
    out: list[PlanChange] = []
    _walk_diff("", _comparable_dict(a), _comparable_dict(b), out)
    return out


def plans_equal(a: StudyPlan, b: StudyPlan) -> bool:
    """Structural equality modulo version and timestamps."""
    return _comparable_dict(a) == _comparable_dict(b)
