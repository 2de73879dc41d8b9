"""Three-stage plan generation: initial draft, critique, improvement.

Prompts are rendered from versioned template files; model output is parsed
out of prose/fenced blocks, schema-checked, and re-prompted at most once per
parse site with the violation list appended. Plan identity, version, profile,
and timestamps are engine-managed and overwrite whatever the model emitted.
"""

from __future__ import annotations

import hashlib
import json
import re
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from .errors import PreconditionError, ProviderError, RepairFailedError
from .model import (
    BackgroundLevel,
    LearnerProfile,
    PlanSchemaError,
    StudyPlan,
    Violation,
    canonical_json,
    profile_to_dict,
    plan_from_dict,
    serialize_plan,
    validate_plan,
    validate_profile,
)
from .providers import (
    GenerationParams,
    Provider,
    ProviderRequest,
    ProviderResponse,
    profile as params_profile,
)

TEMPLATE_DIR_DEFAULT = Path(__file__).parent / "templates"

PLAN_STAGES = ("initial", "critique", "improve")

_USER_SECTION_MARKER = "=== user ==="
_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")

Clock = Callable[[], str]
IdFactory = Callable[[LearnerProfile], str]


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def fixed_clock(timestamp: str) -> Clock:
    return lambda: timestamp


def random_plan_id(profile: LearnerProfile) -> str:
    return "plan-" + uuid.uuid4().hex[:12]


def content_plan_id(profile: LearnerProfile) -> str:
    """Deterministic id derived from the profile; used in test mode."""
    digest = hashlib.sha256(
        canonical_json(profile_to_dict(profile)).encode("utf-8")
    ).hexdigest()
    return "plan-" + digest[:12]


class PromptBundle:
    """Loads per-stage prompt templates from a directory.

    Each template file holds a system prompt, a ``=== user ===`` separator
    line, and a user prompt with ``{{name}}`` placeholders. The shared
    ``format.txt`` snippet is always bound as ``{{format_spec}}``.
    """

    def __init__(self, template_dir: str | Path = TEMPLATE_DIR_DEFAULT):
        self.template_dir = Path(template_dir)
        self.version = (self.template_dir / "VERSION").read_text().strip()
        self._format_spec = (self.template_dir / "format.txt").read_text().strip()
        self._templates: dict[str, tuple[str, str]] = {}
        for path in sorted(self.template_dir.glob("*.txt")):
            if path.name == "format.txt":
                continue
            text = path.read_text(encoding="utf-8")
            lines = text.split("\n")
            try:
                split_at = lines.index(_USER_SECTION_MARKER)
            except ValueError:
                raise ValueError(
                    f"template {path.name} lacks the {_USER_SECTION_MARKER!r} line"
                ) from None
            system = "\n".join(lines[:split_at]).strip()
            user = "\n".join(lines[split_at + 1 :]).strip()
            self._templates[path.stem] = (system, user)

    def render(self, stage: str, bindings: dict[str, str]) -> tuple[str, str]:
        try:
            system, user = self._templates[stage]
        except KeyError:
            raise ValueError(f"no template for stage {stage!r}") from None
        bound = dict(bindings)
        bound.setdefault("format_spec", self._format_spec)

        def substitute(match: re.Match) -> str:
            name = match.group(1)
            if name not in bound:
                raise ValueError(
                    f"template {stage!r} uses unbound placeholder {{{{{name}}}}}"
                )
            return bound[name]

        return _PLACEHOLDER_RE.sub(substitute, system), _PLACEHOLDER_RE.sub(
            substitute, user
        )


def build_stage_prompt(
    stage: str,
    profile: LearnerProfile,
    prior: str | None = None,
    critique: str | None = None,
    *,
    bundle: PromptBundle,
    prior_plan: str = "",
    instruction: str = "",
) -> tuple[str, str]:
    """Render the (system, user) prompts for one pipeline stage.

    ``prior`` is the draft document for the critique and improve stages;
    ``critique`` is additionally required for improve. ``prior_plan`` and
    ``instruction`` carry revision context into the initial stage.
    """
    if stage not in PLAN_STAGES:
        raise ValueError(f"unknown pipeline stage {stage!r}")
    bindings = {
        "subject": profile.subject,
        "goal": profile.goal,
        "level": profile.background_level.value,
        "weeks": str(profile.duration_weeks),
        "daily_minutes": str(profile.daily_minutes),
    }
    if stage == "initial":
        bindings["prior_plan"] = prior_plan
        bindings["instruction"] = instruction
    else:
        if prior is None:
            raise PreconditionError(f"stage {stage!r} requires the prior draft text")
        bindings["prior_stage_output"] = prior
        if stage == "improve":
            if critique is None:
                raise PreconditionError("improve stage requires the critique text")
            bindings["critique"] = critique
    return bundle.render(stage, bindings)


# ---------------------------------------------------------------------------
# response parsing and one-shot repair
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```(?:[a-zA-Z0-9_-]+)?\s*\n(.*?)```", re.DOTALL)


def extract_json_object(text: str) -> Any | None:
    """First JSON object found in a response, tolerating prose and fences."""
    candidates = [m.group(1) for m in _FENCE_RE.finditer(text)]
    candidates.append(text)
    decoder = json.JSONDecoder()
    for candidate in candidates:
        stripped = candidate.strip()
        if stripped.startswith("{"):
            try:
                value, _ = decoder.raw_decode(stripped)
                if isinstance(value, dict):
                    return value
            except json.JSONDecodeError:
                pass
    # Last resort: scan for an object start anywhere in the raw text.
    for match in re.finditer(r"\{", text):
        try:
            value, _ = decoder.raw_decode(text[match.start() :])
        except json.JSONDecodeError:
            continue
        if isinstance(value, dict):
            return value
    return None


@dataclass(frozen=True)
class RepairRequest:
    """Why a response was unusable; its reasons get appended to a re-prompt."""

    reason: str  # "no_payload" | "schema"
    violations: tuple[Violation, ...] = ()

    def describe(self) -> list[str]:
        if self.reason == "no_payload":
            return ["no plan-format JSON document found in the response"]
        return [f"{v.path}: {v.message}" for v in self.violations]


def parse_plan_response(
    text: str, expected_profile: LearnerProfile | None = None
) -> StudyPlan | RepairRequest:
    """Extract and validate a plan document from raw model output.

    When ``expected_profile`` is given, the returned plan carries it and is
    re-validated against it (so a model that drifted from the requested
    duration produces a repairable violation, not a silent mismatch).
    """
    payload = extract_json_object(text)
    if payload is None:
        return RepairRequest("no_payload")
    try:
        plan = plan_from_dict(payload)
    except PlanSchemaError as exc:
        violations = tuple(exc.violations) or (Violation(exc.path, exc.message),)
        return RepairRequest("schema", violations)
    if expected_profile is not None:
        plan = replace(plan, profile=expected_profile)
        violations = validate_plan(plan)
        if violations:
            return RepairRequest("schema", tuple(violations))
    return plan


def repair_prompt(original_user_prompt: str, reasons: list[str]) -> str:
    lines = "\n".join(f"- {reason}" for reason in reasons)
    return (
        f"{original_user_prompt}\n\n"
        f"Your previous response could not be used:\n{lines}\n"
        f"Respond again, following the required output format exactly."
    )


# ---------------------------------------------------------------------------
# trace records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StageRecord:
    stage: str
    request: ProviderRequest
    response: ProviderResponse
    started_at: str
    ended_at: str

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "request": {
                "request_id": self.request.request_id,
                "stage_tag": self.request.stage_tag,
                "system_prompt": self.request.system_prompt,
                "user_prompt": self.request.user_prompt,
                "params": {
                    "temperature": self.request.params.temperature,
                    "top_p": self.request.params.top_p,
                    "frequency_penalty": self.request.params.frequency_penalty,
                    "presence_penalty": self.request.params.presence_penalty,
                    "max_tokens": self.request.params.max_tokens,
                },
            },
            "response": {
                "text": self.response.text,
                "finish_reason": self.response.finish_reason,
                "latency_ms": self.response.latency_ms,
            },
            "started_at": self.started_at,
            "ended_at": self.ended_at,
        }


@dataclass(frozen=True)
class GenerationTrace:
    trace_id: str
    template_version: str
    stages: tuple[StageRecord, ...]
    outcome: str  # "plan" | "error"
    repair_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "trace_id": self.trace_id,
            "template_version": self.template_version,
            "outcome": self.outcome,
            "repair_counts": dict(self.repair_counts),
            "stages": [s.to_dict() for s in self.stages],
        }


def _trace_id_for(profile: LearnerProfile, prior_plan: str, instruction: str) -> str:
    digest = hashlib.sha256(
        (
            canonical_json(profile_to_dict(profile)) + prior_plan + instruction
        ).encode("utf-8")
    ).hexdigest()
    return "trace-" + digest[:16]


class _StageRunner:
    """Issues provider calls for one pipeline run and records them."""

    def __init__(self, provider: Provider, trace_id: str, clock: Clock):
        self.provider = provider
        self.trace_id = trace_id
        self.clock = clock
        self.records: list[StageRecord] = []
        self.repair_counts: dict[str, int] = {}
        self._seq = 0

    def call(
        self, stage_tag: str, system: str, user: str, params: GenerationParams
    ) -> StageRecord:
        self._seq += 1
        request = ProviderRequest(
            request_id=f"{self.trace_id}:{stage_tag}:{self._seq}",
            system_prompt=system,
            user_prompt=user,
            params=params,
            stage_tag=stage_tag,
        )
        started = self.clock()
        try:
            response = self.provider.complete(request)
        except ProviderError as exc:
            if exc.stage_tag is None:
                exc.stage_tag = stage_tag
            raise
        return StageRecord(
            stage=stage_tag,
            request=request,
            response=response,
            started_at=started,
            ended_at=self.clock(),
        )

    def record(self, record: StageRecord) -> None:
        self.records.append(record)

    def note_repair(self, stage_tag: str) -> None:
        self.repair_counts[stage_tag] = self.repair_counts.get(stage_tag, 0) + 1


def _call_plan_stage_with_repair(
    runner: _StageRunner,
    stage: str,
    system: str,
    user: str,
    expected_profile: LearnerProfile,
) -> tuple[StudyPlan, StageRecord]:
    params = params_profile("PLAN")
    record = runner.call(stage, system, user, params)
    parsed = parse_plan_response(record.response.text, expected_profile)
    if isinstance(parsed, RepairRequest):
        runner.note_repair(stage)
        record = runner.call(stage, system, repair_prompt(user, parsed.describe()), params)
        parsed = parse_plan_response(record.response.text, expected_profile)
        if isinstance(parsed, RepairRequest):
            raise RepairFailedError(stage, parsed.describe())
    runner.record(record)
    return parsed, record


def generate_plan(
    profile: LearnerProfile,
    provider: Provider,
    *,
    bundle: PromptBundle | None = None,
    clock: Clock = utc_now_iso,
    id_factory: IdFactory = random_plan_id,
    prior_plan: str = "",
    instruction: str = "",
) -> tuple[StudyPlan, GenerationTrace]:
    """Run the initial -> critique -> improve chain and return a valid plan.

    Exactly three provider calls on the happy path, all with PLAN params,
    plus at most one repair call per parsed stage. The returned plan has
    version 1 and an engine-assigned id; ``prior_plan``/``instruction``
    thread revision context into the initial prompt.
    """
    problems = validate_profile(profile)
    if problems:
        raise PreconditionError(
            "invalid learner profile: "
            + "; ".join(f"{v.path}: {v.message}" for v in problems)
        )
    bundle = bundle or PromptBundle()
    runner = _StageRunner(
        provider, _trace_id_for(profile, prior_plan, instruction), clock
    )

    system, user = build_stage_prompt(
        "initial", profile, bundle=bundle, prior_plan=prior_plan, instruction=instruction
    )
    draft, _ = _call_plan_stage_with_repair(runner, "initial", system, user, profile)
    draft_text = serialize_plan(draft)

    system, user = build_stage_prompt("critique", profile, prior=draft_text, bundle=bundle)
    critique_record = runner.call("critique", system, user, params_profile("PLAN"))
    runner.record(critique_record)
    critique_text = critique_record.response.text

    system, user = build_stage_prompt(
        "improve", profile, prior=draft_text, critique=critique_text, bundle=bundle
    )
    improved, _ = _call_plan_stage_with_repair(runner, "improve", system, user, profile)

    now = clock()
    plan = replace(
        improved,
        plan_id=id_factory(profile),
        version=1,
        profile=profile,
        created_at=now,
        updated_at=now,
    )
    trace = GenerationTrace(
        trace_id=runner.trace_id,
        template_version=bundle.version,
        stages=tuple(runner.records),
        outcome="plan",
        repair_counts=runner.repair_counts,
    )
    return plan, trace


def create_plan(
    profile: LearnerProfile,
    provider: Provider,
    catalog,
    *,
    bundle: PromptBundle | None = None,
    clock: Clock = utc_now_iso,
    id_factory: IdFactory = random_plan_id,
) -> tuple[StudyPlan, GenerationTrace, list]:
    """Full creation flow: three-stage generation plus resource validation.

    Model-emitted resources are candidates only; the catalog pass sets
    authoritative statuses and swaps unusable videos. Validation is part of
    creation, so the returned plan is version 1 regardless of swaps.
    """
    from .resources import auto_replace

    plan, trace = generate_plan(
        profile, provider, bundle=bundle, clock=clock, id_factory=id_factory
    )
    plan, replacements = auto_replace(plan, catalog)
    plan = replace(plan, version=1)
    return plan, trace, replacements


# ---------------------------------------------------------------------------
# background level descriptions
# ---------------------------------------------------------------------------


def _check_level_payload(payload: Any) -> tuple[dict[BackgroundLevel, str] | None, list[str]]:
    if not isinstance(payload, dict):
        return None, ["expected a JSON object of level descriptions"]
    problems = []
    expected = [level.value for level in BackgroundLevel]
    missing = [name for name in expected if name not in payload]
    extra = [name for name in payload if name not in expected]
    if missing:
        problems.append(f"missing levels: {', '.join(missing)}")
    if extra:
        problems.append(f"unexpected keys: {', '.join(extra)}")
    for name in expected:
        value = payload.get(name)
        if name in payload and (not isinstance(value, str) or not value.strip()):
            problems.append(f"description for {name!r} must be a non-empty string")
    if problems:
        return None, problems
    return {level: payload[level.value] for level in BackgroundLevel}, []


def describe_background_levels(
    subject: str,
    provider: Provider,
    *,
    bundle: PromptBundle | None = None,
    clock: Clock = utc_now_iso,
) -> dict[BackgroundLevel, str]:
    """Fetch the six expertise-level descriptions for a subject, in order.

    One provider call with BACKGROUND params; a defective response gets one
    repair re-prompt before a structured error.
    """
    if not subject.strip():
        raise PreconditionError("subject must be non-empty")
    bundle = bundle or PromptBundle()
    system, user = bundle.render("background", {"subject": subject})
    runner = _StageRunner(
        provider, "trace-" + hashlib.sha256(subject.encode()).hexdigest()[:16], clock
    )
    params = params_profile("BACKGROUND")
    record = runner.call("background", system, user, params)
    levels, problems = _check_level_payload(extract_json_object(record.response.text))
    if levels is None:
        runner.note_repair("background")
        record = runner.call(
            "background", system, repair_prompt(user, problems), params
        )
        levels, problems = _check_level_payload(
            extract_json_object(record.response.text)
        )
        if levels is None:
            raise RepairFailedError("background", problems)
    return levels
