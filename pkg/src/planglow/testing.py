"""Deterministic building blocks for scripted-provider runs.

Everything here is formulaic: the same inputs always produce the same
catalog records, plan content, and transcript entries, which is what makes
record/replay fixtures and byte-identical golden-path runs possible.
"""

from __future__ import annotations

import json
from dataclasses import replace

from .model import (
    BackgroundLevel,
    BloomLevel,
    DayPlan,
    LearnerProfile,
    LearningObjective,
    Resource,
    StudyPlan,
    WeekPlan,
    estimated_minutes_for,
    serialize_plan,
)
from .pipeline import PromptBundle, build_stage_prompt, fixed_clock
from .providers import ScriptedProvider, TranscriptEntry, fingerprint
from .resources import CatalogRecord

TEST_TIMESTAMP = "2025-01-01T00:00:00Z"
scripted_clock = fixed_clock(TEST_TIMESTAMP)

# Placeholder values a well-behaved model emits; the engine overwrites them.
PLACEHOLDER_TIMESTAMP = "1970-01-01T00:00:00Z"
PLACEHOLDER_PLAN_ID = "draft"

TOPIC_VOCAB = (
    "graphql",
    "queries",
    "mutations",
    "resolvers",
    "schema design",
    "apis",
    "subscriptions",
    "caching",
    "authentication",
    "deployment",
    "testing",
    "performance",
    "pagination",
    "tooling",
    "clients",
)

_BLOOM_CYCLE = (
    BloomLevel.REMEMBER,
    BloomLevel.UNDERSTAND,
    BloomLevel.APPLY,
    BloomLevel.ANALYZE,
    BloomLevel.EVALUATE,
    BloomLevel.CREATE,
)


def build_catalog_records(count: int = 50) -> list[CatalogRecord]:
    """A formulaic catalog; every 17th record is unavailable."""
    records = []
    for i in range(count):
        primary = TOPIC_VOCAB[i % len(TOPIC_VOCAB)]
        secondary = TOPIC_VOCAB[(i + 3) % len(TOPIC_VOCAB)]
        views = ((i * 37) % 97 + 1) * 1000
        records.append(
            CatalogRecord(
                external_id=f"vid-{i:03d}",
                title=f"{primary.title()} in practice, part {i + 1}",
                url=f"https://videos.example.com/watch?v=vid-{i:03d}",
                duration_seconds=240 + (i % 7) * 60,
                views=views,
                likes=views // (10 + i % 5),
                description=(
                    f"A hands-on walkthrough of {primary} with a look at "
                    f"{secondary} along the way."
                ),
                topics=(primary, secondary),
                rating=round(2.5 + ((i * 7) % 26) / 10, 1),
                available=i % 17 != 0,
            )
        )
    return records


def catalog_records_to_json(records) -> list[dict]:
    return [
        {
            "external_id": r.external_id,
            "title": r.title,
            "url": r.url,
            "duration_seconds": r.duration_seconds,
            "views": r.views,
            "likes": r.likes,
            "description": r.description,
            "topics": list(r.topics),
            "rating": r.rating,
            "available": r.available,
        }
        for r in records
    ]


def build_plan(
    profile: LearnerProfile,
    records,
    *,
    plan_id: str = PLACEHOLDER_PLAN_ID,
    timestamp: str = PLACEHOLDER_TIMESTAMP,
    days_per_week: int = 5,
) -> StudyPlan:
    """A fully valid plan whose resources are copied from catalog records.

    Copying metadata verbatim means a later catalog validation pass is a
    no-op, which keeps creation flows at version 1.
    """
    available = sorted(
        (r for r in records if r.available), key=lambda r: r.external_id
    )
    if not available:
        raise ValueError("need at least one available catalog record")
    weeks = []
    for w in range(profile.duration_weeks):
        days = []
        for d in range(days_per_week):
            slot = w * days_per_week + d
            topic_term = TOPIC_VOCAB[slot % len(TOPIC_VOCAB)]
            topic = f"{profile.subject} {topic_term}"
            chosen = [available[slot % len(available)]]
            if d == 0:
                chosen.append(available[(slot + 7) % len(available)])
            resources = tuple(
                Resource(
                    kind="video",
                    external_id=rec.external_id,
                    url=rec.url,
                    title=rec.title,
                    duration_seconds=rec.duration_seconds,
                    views=rec.views,
                    likes=rec.likes,
                    description=rec.description,
                    status="valid",
                )
                for rec in chosen
            )
            days.append(
                DayPlan(
                    index=d + 1,
                    topic=topic,
                    topic_rationale=(
                        f"Day {d + 1} tackles {topic_term} because it builds "
                        f"directly on what week {w + 1} has covered so far and "
                        f"keeps the difficulty one step ahead of current skill."
                    ),
                    objectives=(
                        LearningObjective(
                            text=f"Work with {topic_term} in {profile.subject}",
                            bloom_level=_BLOOM_CYCLE[slot % len(_BLOOM_CYCLE)],
                        ),
                    ),
                    resources=resources,
                    estimated_minutes=estimated_minutes_for(resources),
                )
            )
        weeks.append(
            WeekPlan(
                index=w + 1,
                title=f"Week {w + 1}: {profile.subject} step {w + 1}",
                objectives=(
                    LearningObjective(
                        text=f"Understand the week {w + 1} landscape of {profile.subject}",
                        bloom_level=BloomLevel.UNDERSTAND,
                    ),
                    LearningObjective(
                        text=f"Apply week {w + 1} {profile.subject} techniques to {profile.goal}",
                        bloom_level=BloomLevel.APPLY,
                    ),
                ),
                content_rationale=(
                    f"Week {w + 1} concentrates on the skills a "
                    f"{profile.background_level.value} learner needs next to "
                    f"move toward the goal: {profile.goal}."
                ),
                connections=(
                    f"The material extends week {w}'s ideas and ties "
                    f"{profile.subject} concepts back to things the learner "
                    f"already knows."
                    if w
                    else f"The material anchors new {profile.subject} concepts "
                    f"to everyday prior knowledge before going deeper."
                ),
                days=tuple(days),
            )
        )
    return StudyPlan(
        plan_id=plan_id,
        version=1,
        profile=profile,
        weeks=tuple(weeks),
        days_per_week=days_per_week,
        created_at=timestamp,
        updated_at=timestamp,
    )


def fenced(document: str, note: str = "Here is the plan.") -> str:
    return f"{note}\n\n```json\n{document}```\n"


def critique_text(profile: LearnerProfile) -> str:
    return (
        f"1. Self-direction: the plan leaves room for the learner to steer; "
        f"keep the weekly structure.\n"
        f"2. Experience: tie more tasks to what a "
        f"{profile.background_level.value} learner of {profile.subject} has "
        f"already seen.\n"
        f"3. Relevance: every week should state how it advances the goal "
        f"({profile.goal}); tighten the rationales.\n"
        f"4. Organization: objectives are clear; keep complexity rising "
        f"day over day.\n"
        f"5. Feasibility: daily workload fits within "
        f"{profile.daily_minutes} minutes; no change needed."
    )


def as_model_document(plan: StudyPlan) -> str:
    """Serialize plan content the way a well-behaved model would emit it."""
    return serialize_plan(
        replace(
            plan,
            plan_id=PLACEHOLDER_PLAN_ID,
            version=1,
            created_at=PLACEHOLDER_TIMESTAMP,
            updated_at=PLACEHOLDER_TIMESTAMP,
        )
    )


def transcript_for_generation(
    profile: LearnerProfile,
    plan_content: StudyPlan,
    *,
    bundle: PromptBundle | None = None,
    prior_plan: str = "",
    instruction: str = "",
    draft_content: StudyPlan | None = None,
) -> list[TranscriptEntry]:
    """Entries for one full initial/critique/improve run yielding the plan."""
    bundle = bundle or PromptBundle()
    draft_doc = as_model_document(draft_content or plan_content)
    final_doc = as_model_document(plan_content)
    critique = critique_text(profile)

    _, initial_user = build_stage_prompt(
        "initial", profile, bundle=bundle, prior_plan=prior_plan, instruction=instruction
    )
    _, critique_user = build_stage_prompt(
        "critique", profile, prior=draft_doc, bundle=bundle
    )
    _, improve_user = build_stage_prompt(
        "improve", profile, prior=draft_doc, critique=critique, bundle=bundle
    )
    return [
        TranscriptEntry("initial", fingerprint(initial_user), fenced(draft_doc)),
        TranscriptEntry("critique", fingerprint(critique_user), critique),
        TranscriptEntry(
            "improve", fingerprint(improve_user), fenced(final_doc, "Refined plan:")
        ),
    ]


def default_level_descriptions(subject: str) -> dict[str, str]:
    blurbs = {
        "novice": "follows explicit rules and worked examples step by step",
        "advanced_beginner": "recognizes recurring situations and adapts examples",
        "competence": "plans deliberately and handles routine work independently",
        "proficiency": "sees situations whole and prioritizes what matters",
        "expertise": "acts fluidly from deep experience, rarely needing rules",
        "mastery": "sets the standard, innovates, and teaches others",
    }
    return {
        level.value: (
            f"A {level.value.replace('_', ' ')} in {subject} "
            f"{blurbs[level.value]}."
        )
        for level in BackgroundLevel
    }


def transcript_for_levels(
    subject: str,
    *,
    bundle: PromptBundle | None = None,
    descriptions: dict[str, str] | None = None,
) -> list[TranscriptEntry]:
    bundle = bundle or PromptBundle()
    _, user = bundle.render("background", {"subject": subject})
    payload = descriptions or default_level_descriptions(subject)
    return [
        TranscriptEntry(
            "background",
            fingerprint(user),
            json.dumps(payload, indent=2),
        )
    ]


def transcript_for_intent(
    message: str, label: str, *, bundle: PromptBundle | None = None
) -> list[TranscriptEntry]:
    bundle = bundle or PromptBundle()
    _, user = bundle.render("intent", {"message": message})
    return [TranscriptEntry("intent", fingerprint(user), label)]


def transcript_for_chat_answer(
    plan_document: str,
    message: str,
    reply: str,
    *,
    bundle: PromptBundle | None = None,
) -> list[TranscriptEntry]:
    bundle = bundle or PromptBundle()
    _, user = bundle.render(
        "chat_answer", {"plan_document": plan_document, "message": message}
    )
    return [TranscriptEntry("chat_answer", fingerprint(user), reply)]


def dedupe_entries(entries) -> list[TranscriptEntry]:
    """Collapse exact duplicates (two runs sharing an exchange); conflicting
    responses under one key are a bug and still surface as an error."""
    seen: dict[tuple[str, str], TranscriptEntry] = {}
    out: list[TranscriptEntry] = []
    for entry in entries:
        key = (entry.stage_tag, entry.prompt_fingerprint)
        if key in seen:
            if seen[key].response_text != entry.response_text:
                raise ValueError(f"conflicting transcript entries for {key}")
            continue
        seen[key] = entry
        out.append(entry)
    return out


def scripted_provider(*entry_lists) -> ScriptedProvider:
    merged: list[TranscriptEntry] = []
    for entries in entry_lists:
        merged.extend(entries)
    return ScriptedProvider(dedupe_entries(merged))
