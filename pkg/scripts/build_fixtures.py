#!/usr/bin/env python3
"""Regenerate the packaged fixtures: mock catalog, golden transcript, golden plan.

Everything is derived deterministically from the template set and the
formulaic builders in planglow.testing, so rerunning this script after a
template change refreshes the prompt fingerprints without touching content.

Usage:
    python3 scripts/build_fixtures.py [--check]

--check exits nonzero if the files on disk differ from what would be written.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from planglow.model import BackgroundLevel, LearnerProfile, serialize_plan
from planglow.pipeline import PromptBundle, content_plan_id, create_plan
from planglow.providers import TranscriptEntry
from planglow.resources import MockCatalog
from planglow.testing import (
    build_catalog_records,
    build_plan,
    catalog_records_to_json,
    scripted_provider,
    scripted_clock,
    transcript_for_chat_answer,
    transcript_for_generation,
    transcript_for_intent,
    transcript_for_levels,
)

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "src" / "planglow" / "fixtures"

GOLDEN_PROFILE = LearnerProfile(
    subject="GraphQL",
    goal="deploy a website",
    background_level=BackgroundLevel.NOVICE,
    duration_weeks=2,
    daily_minutes=60,
)

CHAT_QUESTION = "Why is schema design scheduled before resolvers?"
CHAT_ANSWER = (
    "Schema design comes first because the schema is the contract every "
    "resolver implements; see week 1, days 4-5 of your plan."
)


def build_all() -> dict[str, str]:
    bundle = PromptBundle()
    records = build_catalog_records(50)
    catalog = MockCatalog(records)

    content = build_plan(GOLDEN_PROFILE, records)
    entries: list[TranscriptEntry] = []
    entries += transcript_for_levels(GOLDEN_PROFILE.subject, bundle=bundle)
    entries += transcript_for_generation(GOLDEN_PROFILE, content, bundle=bundle)

    plan, _trace, _repl = create_plan(
        GOLDEN_PROFILE,
        scripted_provider(entries),
        catalog,
        bundle=bundle,
        clock=scripted_clock,
        id_factory=content_plan_id,
    )
    golden_doc = serialize_plan(plan)

    # Entries for the walkthrough inline edit (daily availability 60 -> 90),
    # which regenerates with the version-1 document as prior context.
    edited_profile = replace(GOLDEN_PROFILE, daily_minutes=90)
    edited_content = build_plan(edited_profile, records)
    entries += transcript_for_generation(
        edited_profile, edited_content, bundle=bundle, prior_plan=golden_doc
    )

    # Entries for the walkthrough chat question against the version-1 plan.
    entries += transcript_for_intent(CHAT_QUESTION, "question", bundle=bundle)
    entries += transcript_for_chat_answer(
        golden_doc, CHAT_QUESTION, CHAT_ANSWER, bundle=bundle
    )

    transcript_payload = [
        {
            "stage_tag": e.stage_tag,
            "prompt_fingerprint": e.prompt_fingerprint,
            "response_text": e.response_text,
        }
        for e in entries
    ]
    return {
        "mock_catalog.json": json.dumps(
            catalog_records_to_json(records), indent=2, ensure_ascii=False
        )
        + "\n",
        "golden_transcript.json": json.dumps(
            transcript_payload, indent=2, ensure_ascii=False
        )
        + "\n",
        "golden_plan.json": golden_doc,
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--check", action="store_true", help="verify, don't write")
    args = parser.parse_args()

    outputs = build_all()
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    stale = []
    for name, text in outputs.items():
        path = FIXTURE_DIR / name
        current = path.read_text(encoding="utf-8") if path.exists() else None
        if current != text:
            stale.append(name)
            if not args.check:
                path.write_text(text, encoding="utf-8")
    if args.check:
        if stale:
            print(f"stale fixtures: {', '.join(stale)}", file=sys.stderr)
            return 1
        print("fixtures up to date")
        return 0
    print(
        f"wrote {len(stale)} fixture(s) to {FIXTURE_DIR}"
        if stale
        else "fixtures already up to date"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
