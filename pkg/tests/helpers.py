"""Shared test utilities: nested mutation of frozen plans, random profiles,
and independent oracles kept deliberately separate from the implementation."""

from __future__ import annotations

import random
import re
from dataclasses import replace

from planglow.model import (
    BackgroundLevel,
    LearnerProfile,
    StudyPlan,
)

SUBJECTS = (
    "GraphQL",
    "Spanish",
    "Linear algebra",
    "Video editing",
    "Kubernetes",
    "Statistics",
    "日本語",
    "Salsa dancing",
)

GOALS = (
    "deploy a website",
    "hold a 10-minute conversation",
    "pass the certification exam",
    "publish a short film",
    "read research papers fluently",
)


def with_profile(plan: StudyPlan, **kwargs) -> StudyPlan:
    return replace(plan, profile=replace(plan.profile, **kwargs))


def with_week(plan: StudyPlan, i: int, **kwargs) -> StudyPlan:
    weeks = list(plan.weeks)
    weeks[i] = replace(weeks[i], **kwargs)
    return replace(plan, weeks=tuple(weeks))


def with_day(plan: StudyPlan, i: int, j: int, **kwargs) -> StudyPlan:
    days = list(plan.weeks[i].days)
    days[j] = replace(days[j], **kwargs)
    return with_week(plan, i, days=tuple(days))


def with_resource(plan: StudyPlan, i: int, j: int, k: int, **kwargs) -> StudyPlan:
    resources = list(plan.weeks[i].days[j].resources)
    resources[k] = replace(resources[k], **kwargs)
    return with_day(plan, i, j, resources=tuple(resources))


def reseal_day(plan: StudyPlan, i: int, j: int) -> StudyPlan:
    """Recompute a day's estimated minutes after resource surgery."""
    from planglow.model import estimated_minutes_for

    day = plan.weeks[i].days[j]
    return with_day(
        plan, i, j, estimated_minutes=estimated_minutes_for(day.resources)
    )


def seed_invalid_resource(plan: StudyPlan, i: int, j: int, k: int, ident: str) -> StudyPlan:
    """Point one resource at a nonexistent catalog id, keeping the plan valid."""
    return reseal_day(with_resource(plan, i, j, k, external_id=ident), i, j)


def with_objective(plan: StudyPlan, i: int, j: int | None, k: int, **kwargs) -> StudyPlan:
    """Mutate a week-level (j=None) or day-level objective."""
    if j is None:
        objectives = list(plan.weeks[i].objectives)
        objectives[k] = replace(objectives[k], **kwargs)
        return with_week(plan, i, objectives=tuple(objectives))
    objectives = list(plan.weeks[i].days[j].objectives)
    objectives[k] = replace(objectives[k], **kwargs)
    return with_day(plan, i, j, objectives=tuple(objectives))


def random_profile(rng: random.Random, *, max_weeks: int = 4) -> LearnerProfile:
    return LearnerProfile(
        subject=rng.choice(SUBJECTS),
        goal=rng.choice(GOALS),
        background_level=rng.choice(list(BackgroundLevel)),
        duration_weeks=rng.randint(1, max_weeks),
        daily_minutes=rng.randint(10, 960),
    )


# -- independent oracles ------------------------------------------------------
# These re-derive the ranking rules from scratch (plain loops, no shared key
# functions) so they can catch mistakes in the implementation's sorting.


def oracle_tokens(text: str) -> set[str]:
    return set(re.findall(r"[a-z0-9]+", text.lower()))


def oracle_relevance(topic: str, record) -> float:
    topic_tokens = oracle_tokens(topic)
    if not topic_tokens:
        return 0.0
    blob = record.title + " " + record.description + " " + " ".join(record.topics)
    hits = 0
    for token in topic_tokens:
        if token in oracle_tokens(blob):
            hits += 1
    return hits / len(topic_tokens)


def oracle_topic_matches(topic: str, record) -> bool:
    blob = record.title + " " + record.description + " " + " ".join(record.topics)
    return bool(oracle_tokens(topic) & oracle_tokens(blob))


def oracle_level_ok(record, level: BackgroundLevel) -> bool:
    level_names = {lvl.value for lvl in BackgroundLevel}
    tags = {t.lower() for t in record.topics if t.lower() in level_names}
    return not tags or level.value in tags


def oracle_replacement_better(a, b) -> bool:
    """True when record ``a`` should be preferred over ``b`` as a replacement."""
    if a.rating != b.rating:
        return a.rating > b.rating
    if a.views != b.views:
        return a.views > b.views
    return a.external_id < b.external_id


def oracle_best_replacement(records, topic, level, budget_seconds):
    """Exhaustive argmax over qualifying catalog records; None if none qualify."""
    best = None
    for record in records:
        if not record.available:
            continue
        if not oracle_topic_matches(topic, record):
            continue
        if record.duration_seconds > budget_seconds:
            continue
        if not oracle_level_ok(record, level):
            continue
        if best is None or oracle_replacement_better(record, best):
            best = record
    return best


def oracle_alternatives(records, query):
    """Brute-force scoring and sort for the alternatives ranking."""
    rows = []
    for record in records:
        if not record.available:
            continue
        if not oracle_topic_matches(query.topic, record):
            continue
        if record.duration_seconds > query.max_duration_seconds:
            continue
        if not oracle_level_ok(record, query.background_level):
            continue
        rows.append((record, oracle_relevance(query.topic, record)))
    ordered = sorted(
        rows, key=lambda row: (-row[1], -row[0].views, row[0].external_id)
    )
    return ordered[: query.limit]
