"""CLI commands in hermetic test mode: deterministic bytes, exit discipline."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from planglow.cli import main
from planglow.model import deserialize_plan, serialize_plan
from planglow.service import FIXTURE_DIR
from planglow.testing import build_plan

from helpers import with_resource

GOLDEN_DOC = (FIXTURE_DIR / "golden_plan.json").read_text(encoding="utf-8")

GENERATE_ARGS = [
    "generate",
    "--subject",
    "GraphQL",
    "--goal",
    "deploy a website",
    "--level",
    "novice",
    "--weeks",
    "2",
    "--daily-minutes",
    "60",
]


@pytest.fixture()
def runner():
    return CliRunner()


def _run(runner, tmp_path, args, **kwargs):
    return runner.invoke(
        main, ["--mode", "test", "--data-dir", str(tmp_path / "data"), *args], **kwargs
    )


def test_generate_writes_golden_plan(runner, tmp_path):
    result = _run(runner, tmp_path, GENERATE_ARGS)
    assert result.exit_code == 0, result.output
    plan_path = result.output.strip().splitlines()[-1]
    assert (tmp_path / "data") in __import__("pathlib").Path(plan_path).parents
    written = open(plan_path, encoding="utf-8").read()
    assert written == GOLDEN_DOC
    trace_path = plan_path.replace(".json", ".trace.json")
    trace = json.load(open(trace_path))
    assert [s["stage"] for s in trace["stages"]] == ["initial", "critique", "improve"]


def test_generate_is_deterministic_across_runs(runner, tmp_path):
    first = _run(runner, tmp_path / "a", GENERATE_ARGS)
    second = _run(runner, tmp_path / "b", GENERATE_ARGS)
    assert first.exit_code == 0 and second.exit_code == 0
    bytes_a = open(first.output.strip().splitlines()[-1], "rb").read()
    bytes_b = open(second.output.strip().splitlines()[-1], "rb").read()
    assert bytes_a == bytes_b


def test_generate_rejects_bad_profile_with_exit_1(runner, tmp_path):
    args = list(GENERATE_ARGS)
    args[args.index("2")] = "0"  # duration_weeks
    result = _run(runner, tmp_path, args)
    assert result.exit_code == 1
    assert result.output.strip().startswith("error:") or "error:" in result.output


def test_usage_error_exits_2(runner, tmp_path):
    result = _run(runner, tmp_path, ["generate", "--subject", "X"])
    assert result.exit_code == 2


def test_lint_passes_golden(runner, tmp_path):
    plan_file = tmp_path / "plan.json"
    plan_file.write_text(GOLDEN_DOC, encoding="utf-8")
    result = _run(runner, tmp_path, ["lint", str(plan_file)])
    assert result.exit_code == 0, result.output
    assert "score: 5/5" in result.output
    for criterion in ("Q1", "Q2", "Q3", "Q4", "Q5"):
        assert f"{criterion} pass" in result.output


def test_lint_fails_on_invalid_resource(runner, tmp_path):
    plan = with_resource(deserialize_plan(GOLDEN_DOC), 0, 0, 0, status="invalid")
    plan_file = tmp_path / "plan.json"
    plan_file.write_text(serialize_plan(plan), encoding="utf-8")
    result = _run(runner, tmp_path, ["lint", str(plan_file)])
    assert result.exit_code == 1
    assert "Q3 fail" in result.output


def test_validate_resources_rewrites_and_reports(runner, tmp_path):
    plan = with_resource(
        deserialize_plan(GOLDEN_DOC), 0, 0, 0, external_id="missing-xyz"
    )
    plan_file = tmp_path / "plan.json"
    plan_file.write_text(serialize_plan(plan), encoding="utf-8")
    result = _run(runner, tmp_path, ["validate-resources", str(plan_file)])
    assert result.exit_code == 0, result.output
    assert "missing-xyz ->" in result.output
    rewritten = deserialize_plan(plan_file.read_text(encoding="utf-8"))
    slot = rewritten.weeks[0].days[0].resources[0]
    assert slot.status == "replaced"
    assert slot.provenance == "missing-xyz"
    assert rewritten.version == plan.version + 1


def test_validate_resources_noop_message(runner, tmp_path):
    plan_file = tmp_path / "plan.json"
    plan_file.write_text(GOLDEN_DOC, encoding="utf-8")
    result = _run(runner, tmp_path, ["validate-resources", str(plan_file)])
    assert result.exit_code == 0
    assert "no replacements" in result.output
    assert plan_file.read_text(encoding="utf-8") == GOLDEN_DOC


def test_export_renders_markdown(runner, tmp_path):
    plan_file = tmp_path / "plan.json"
    plan_file.write_text(GOLDEN_DOC, encoding="utf-8")
    out_file = tmp_path / "plan.md"
    result = _run(runner, tmp_path, ["export", str(plan_file), "--out", str(out_file)])
    assert result.exit_code == 0
    markdown = out_file.read_text(encoding="utf-8")
    plan = deserialize_plan(GOLDEN_DOC)
    assert f"<!-- plan {plan.plan_id} v1 -->" in markdown
    assert "## Week 1" in markdown
    assert "## Week 2" in markdown
    assert "### Day 5" in markdown
    assert "[valid]" in markdown
    assert plan.weeks[0].days[0].resources[0].url in markdown


def test_export_marks_invalid_resources(runner, tmp_path):
    plan = with_resource(deserialize_plan(GOLDEN_DOC), 0, 0, 0, status="invalid")
    plan_file = tmp_path / "plan.json"
    plan_file.write_text(serialize_plan(plan), encoding="utf-8")
    result = _run(runner, tmp_path, ["export", str(plan_file)])
    assert result.exit_code == 0
    assert "[INVALID]" in result.output


def test_export_embeds_identity_distinguishing_plans(runner, tmp_path, records, golden_profile):
    other = build_plan(
        golden_profile, records, plan_id="plan-other", timestamp="2025-01-01T00:00:00Z"
    )
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text(GOLDEN_DOC, encoding="utf-8")
    b.write_text(serialize_plan(other), encoding="utf-8")
    out_a = _run(runner, tmp_path, ["export", str(a)]).output
    out_b = _run(runner, tmp_path, ["export", str(b)]).output
    assert out_a != out_b


def test_replay_matches_packaged_golden(runner, tmp_path):
    result = _run(runner, tmp_path, ["replay"])
    assert result.exit_code == 0, result.output
    assert "replay ok" in result.output


def test_replay_detects_tampered_golden(runner, tmp_path):
    tampered = deserialize_plan(GOLDEN_DOC)
    tampered = with_resource(tampered, 0, 0, 0, views=tampered.weeks[0].days[0].resources[0].views + 1)
    golden_file = tmp_path / "golden.json"
    golden_file.write_text(serialize_plan(tampered), encoding="utf-8")
    result = _run(runner, tmp_path, ["replay", "--golden", str(golden_file)])
    assert result.exit_code == 1
    assert "---" in result.output and "+++" in result.output
    assert "error: replay" in result.output
