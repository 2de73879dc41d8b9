"""Plan model: validation paths, canonical round trips, and diff semantics."""

from __future__ import annotations

import json
import random
from dataclasses import replace

import pytest

from planglow.errors import PlanParseError, PlanSchemaError
from planglow.model import (
    BackgroundLevel,
    LearnerProfile,
    deserialize_plan,
    diff_plans,
    plans_equal,
    serialize_plan,
    validate_plan,
)
from planglow.testing import build_plan

from helpers import (
    random_profile,
    with_day,
    with_objective,
    with_profile,
    with_resource,
    with_week,
)


@pytest.fixture()
def plan(golden_profile, records):
    return build_plan(golden_profile, records, plan_id="plan-test")


def test_valid_plan_has_no_violations(plan):
    assert validate_plan(plan) == []
    assert len(plan.weeks) == 2
    assert all(len(w.days) == 5 for w in plan.weeks)


def test_week_count_mismatch_is_one_violation_at_weeks(plan):
    short = replace(plan, weeks=plan.weeks[:1])
    violations = validate_plan(short)
    assert len(violations) == 1
    assert violations[0].path == "weeks"


def test_day_without_objectives_is_flagged_at_its_path(plan):
    mutated = with_day(plan, 1, 3, objectives=())
    violations = validate_plan(mutated)
    assert len(violations) == 1
    assert violations[0].path == "weeks[1].days[3].objectives"


def test_estimated_minutes_must_match_resource_durations(plan):
    mutated = with_day(plan, 0, 1, estimated_minutes=999)
    violations = validate_plan(mutated)
    assert [v.path for v in violations] == ["weeks[0].days[1].estimated_minutes"]


def test_round_trip_identity(plan):
    assert deserialize_plan(serialize_plan(plan)) == plan


def test_serialization_is_canonical(plan):
    assert serialize_plan(plan) == serialize_plan(plan)
    # Key order in the source dict must not matter.
    reordered = json.loads(serialize_plan(plan))
    scrambled = json.dumps(reordered, sort_keys=False)
    assert serialize_plan(deserialize_plan(scrambled)) == serialize_plan(plan)


def test_preferred_media_round_trips(plan):
    tagged = with_profile(plan, preferred_media=("video",))
    assert deserialize_plan(serialize_plan(tagged)) == tagged
    assert "preferred_media" not in json.loads(serialize_plan(plan))["profile"]


def test_deserialize_rejects_malformed_json_with_position():
    with pytest.raises(PlanParseError) as excinfo:
        deserialize_plan('{"schema": "planglow/1",')
    assert excinfo.value.line >= 1
    assert excinfo.value.column >= 1


def test_replaced_without_provenance_is_schema_error_at_path(plan):
    document = json.loads(serialize_plan(plan))
    resource = document["weeks"][0]["days"][0]["resources"][0]
    resource["status"] = "replaced"
    resource.pop("provenance", None)
    with pytest.raises(PlanSchemaError) as excinfo:
        deserialize_plan(json.dumps(document))
    assert excinfo.value.path == "weeks[0].days[0].resources[0].provenance"


def test_deserialize_rejects_wrong_schema_tag(plan):
    document = json.loads(serialize_plan(plan))
    document["schema"] = "planglow/999"
    with pytest.raises(PlanSchemaError) as excinfo:
        deserialize_plan(json.dumps(document))
    assert excinfo.value.path == "schema"


def test_deserialize_names_first_missing_field(plan):
    document = json.loads(serialize_plan(plan))
    del document["weeks"][1]["connections"]
    with pytest.raises(PlanSchemaError) as excinfo:
        deserialize_plan(json.dumps(document))
    assert excinfo.value.path == "weeks[1].connections"


def test_diff_identity_is_empty(plan):
    assert diff_plans(plan, plan) == []


def test_diff_ignores_version_and_timestamps(plan):
    other = replace(plan, version=7, created_at="2030-01-01T00:00:00Z", updated_at="2031-01-01T00:00:00Z")
    assert diff_plans(plan, other) == []
    assert plans_equal(plan, other)


def test_single_video_swap_is_one_change_record(plan, records):
    swap = records[20]
    mutated = with_resource(
        plan,
        0,
        0,
        0,
        external_id=swap.external_id,
        url=swap.url,
        title=swap.title,
        duration_seconds=plan.weeks[0].days[0].resources[0].duration_seconds,
        views=swap.views,
        likes=swap.likes,
        description=swap.description,
    )
    changes = diff_plans(plan, mutated)
    assert len(changes) == 1
    assert changes[0].path == "weeks[0].days[0].resources[0]"


def test_two_field_edit_is_two_change_records(plan):
    mutated = with_profile(plan, goal="ship an API")
    mutated = with_week(mutated, 1, title="Week 2 retitled")
    changes = diff_plans(plan, mutated)
    assert sorted(c.path for c in changes) == ["profile.goal", "weeks[1].title"]


def test_diff_counts_leaf_changes_exactly(plan):
    mutated = with_day(plan, 0, 2, topic="New topic", topic_rationale="New reason")
    mutated = with_week(mutated, 0, connections="Rewired connections")
    assert len(diff_plans(plan, mutated)) == 3


def test_diff_reports_added_week(plan, golden_profile, records):
    bigger_profile = replace(golden_profile, duration_weeks=3)
    bigger = build_plan(bigger_profile, records, plan_id="plan-test")
    changes = diff_plans(plan, bigger)
    paths = {c.path for c in changes}
    assert "weeks[2]" in paths
    assert "profile.duration_weeks" in paths


def test_background_level_order_is_total_and_benner():
    levels = list(BackgroundLevel)
    assert [l.value for l in levels] == [
        "novice",
        "advanced_beginner",
        "competence",
        "proficiency",
        "expertise",
        "mastery",
    ]
    for i, a in enumerate(levels):
        for j, b in enumerate(levels):
            assert (a < b) == (i < j)
            assert (a <= b) == (i <= j)


# Single-field mutations that must each yield exactly one violation at the
# mutated path. Reused by the acceptance suite.
MUTATIONS = [
    ("plan_id empty", lambda p: replace(p, plan_id=""), "plan_id"),
    ("version zero", lambda p: replace(p, version=0), "version"),
    ("version negative", lambda p: replace(p, version=-3), "version"),
    ("subject empty", lambda p: with_profile(p, subject=""), "profile.subject"),
    ("subject blank", lambda p: with_profile(p, subject="   "), "profile.subject"),
    ("goal empty", lambda p: with_profile(p, goal=""), "profile.goal"),
    ("daily too small", lambda p: with_profile(p, daily_minutes=5), "profile.daily_minutes"),
    ("daily too large", lambda p: with_profile(p, daily_minutes=961), "profile.daily_minutes"),
    ("week index broken", lambda p: with_week(p, 0, index=2), "weeks[0].index"),
    ("week title empty", lambda p: with_week(p, 0, title=""), "weeks[0].title"),
    ("week objectives empty", lambda p: with_week(p, 0, objectives=()), "weeks[0].objectives"),
    ("week rationale empty", lambda p: with_week(p, 0, content_rationale=" "), "weeks[0].content_rationale"),
    ("week connections empty", lambda p: with_week(p, 0, connections=""), "weeks[0].connections"),
    ("day index broken", lambda p: with_day(p, 0, 2, index=5), "weeks[0].days[2].index"),
    ("day topic empty", lambda p: with_day(p, 0, 0, topic=""), "weeks[0].days[0].topic"),
    ("day objectives empty", lambda p: with_day(p, 1, 3, objectives=()), "weeks[1].days[3].objectives"),
    ("day estimate wrong", lambda p: with_day(p, 0, 1, estimated_minutes=999), "weeks[0].days[1].estimated_minutes"),
    ("objective text empty", lambda p: with_objective(p, 0, None, 0, text=""), "weeks[0].objectives[0].text"),
    ("day objective text empty", lambda p: with_objective(p, 0, 1, 0, text=" "), "weeks[0].days[1].objectives[0].text"),
    ("resource url relative", lambda p: with_resource(p, 0, 1, 0, url="not-a-url"), "weeks[0].days[1].resources[0].url"),
    ("resource status bogus", lambda p: with_resource(p, 0, 1, 0, status="bogus"), "weeks[0].days[1].resources[0].status"),
    ("replaced without provenance", lambda p: with_resource(p, 0, 1, 0, status="replaced", provenance=None), "weeks[0].days[1].resources[0].provenance"),
    ("resource views negative", lambda p: with_resource(p, 0, 1, 0, views=-5), "weeks[0].days[1].resources[0].views"),
    ("resource likes negative", lambda p: with_resource(p, 0, 1, 0, likes=-1), "weeks[0].days[1].resources[0].likes"),
    ("resource id empty", lambda p: with_resource(p, 0, 1, 0, external_id=""), "weeks[0].days[1].resources[0].external_id"),
    ("resource kind empty", lambda p: with_resource(p, 0, 1, 0, kind=""), "weeks[0].days[1].resources[0].kind"),
]


@pytest.mark.parametrize("name,mutate,expected_path", MUTATIONS, ids=[m[0] for m in MUTATIONS])
def test_single_field_mutation_yields_one_violation(plan, name, mutate, expected_path):
    violations = validate_plan(mutate(plan))
    assert [v.path for v in violations] == [expected_path]


def test_random_plans_round_trip(records):
    rng = random.Random(2024)
    for _ in range(25):
        profile = random_profile(rng)
        plan = build_plan(profile, records, plan_id=f"plan-{rng.randint(0, 10**9)}")
        assert validate_plan(plan) == []
        document = serialize_plan(plan)
        assert serialize_plan(deserialize_plan(document)) == document
