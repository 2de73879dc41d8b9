"""Plan revision: in-line profile edits and the chat channel.

Edits never patch the document locally; the full three-stage pipeline re-runs
with the prior plan embedded as context so the explanation fields stay
consistent with the new content. All operations are pure: on any failure the
caller's plan is untouched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .errors import PreconditionError, ProviderError
from .model import (
    BackgroundLevel,
    LearnerProfile,
    StudyPlan,
    diff_plans,
    serialize_plan,
    validate_plan,
    validate_profile,
)
from .pipeline import (
    Clock,
    GenerationTrace,
    PromptBundle,
    _StageRunner,
    generate_plan,
    utc_now_iso,
)
from .providers import Provider, profile as params_profile
from .resources import Catalog, auto_replace

EDITABLE_FIELDS = (
    "subject",
    "goal",
    "background_level",
    "duration_weeks",
    "daily_minutes",
)

# Fallback router for when the classifier call fails or returns garbage.
EDIT_LEXICON = ("change", "replace", "make it", "add", "remove", "shorten", "extend")
_EDIT_PATTERNS = [
    re.compile(rf"\b{re.escape(term)}\b", re.IGNORECASE) for term in EDIT_LEXICON
]


@dataclass(frozen=True)
class InlineEdit:
    field: str
    new_value: object

    def __post_init__(self):
        if self.field not in EDITABLE_FIELDS:
            raise PreconditionError(
                f"field {self.field!r} is not editable; "
                f"choose one of {', '.join(EDITABLE_FIELDS)}"
            )

    @classmethod
    def from_raw(cls, field: str, raw: object) -> "InlineEdit":
        """Coerce a wire-format value (strings, ints) to the field's type."""
        if field == "background_level":
            if isinstance(raw, BackgroundLevel):
                return cls(field, raw)
            try:
                return cls(field, BackgroundLevel(str(raw)))
            except ValueError:
                raise PreconditionError(f"unknown background level {raw!r}") from None
        if field in ("duration_weeks", "daily_minutes"):
            try:
                return cls(field, int(raw))
            except (TypeError, ValueError):
                raise PreconditionError(f"{field} must be an integer, got {raw!r}") from None
        if field in ("subject", "goal"):
            if not isinstance(raw, str):
                raise PreconditionError(f"{field} must be a string")
            return cls(field, raw)
        return cls(field, raw)


@dataclass(frozen=True)
class ChatTurn:
    role: str  # "user" | "system"
    text: str
    linked_plan_version: int
    intent: str | None = None


@dataclass(frozen=True)
class ChatResult:
    reply: str
    intent: str
    plan: StudyPlan | None
    trace: GenerationTrace | None
    turns: tuple[ChatTurn, ChatTurn]


def edited_profile(profile: LearnerProfile, edit: InlineEdit) -> LearnerProfile:
    updated = replace(profile, **{edit.field: edit.new_value})
    problems = validate_profile(updated)
    if problems:
        raise PreconditionError(
            "edit produces an invalid profile: "
            + "; ".join(f"{v.path}: {v.message}" for v in problems)
        )
    return updated


def _regenerate(
    plan: StudyPlan,
    profile: LearnerProfile,
    provider: Provider,
    catalog: Catalog,
    *,
    bundle: PromptBundle | None,
    clock: Clock,
    instruction: str = "",
) -> tuple[StudyPlan, GenerationTrace]:
    """Re-run the pipeline with the prior plan as context, then re-validate
    resources; the result inherits the plan's identity at version+1."""
    new_plan, trace = generate_plan(
        profile,
        provider,
        bundle=bundle,
        clock=clock,
        id_factory=lambda _profile: plan.plan_id,
        prior_plan=serialize_plan(plan),
        instruction=instruction,
    )
    new_plan, _replacements = auto_replace(new_plan, catalog)
    new_plan = replace(
        new_plan,
        version=plan.version + 1,
        created_at=plan.created_at,
        updated_at=clock(),
    )
    return new_plan, trace


def apply_inline_edit(
    plan: StudyPlan,
    edit: InlineEdit,
    provider: Provider,
    catalog: Catalog,
    *,
    bundle: PromptBundle | None = None,
    clock: Clock = utc_now_iso,
) -> tuple[StudyPlan, GenerationTrace]:
    """Apply one profile edit by re-running the full pipeline."""
    violations = validate_plan(plan)
    if violations:
        raise PreconditionError(
            f"cannot edit an invalid plan; first violation: {violations[0].path}"
        )
    updated = edited_profile(plan.profile, edit)
    return _regenerate(
        plan, updated, provider, catalog, bundle=bundle, clock=clock
    )


def classify_intent(
    message: str,
    provider: Provider,
    *,
    bundle: PromptBundle | None = None,
    clock: Clock = utc_now_iso,
) -> str:
    """Label a chat message "edit" or "question"; total for non-empty input.

    One forced-choice provider call; any failure or off-menu answer falls
    back to the imperative-edit lexicon.
    """
    if not message.strip():
        raise PreconditionError("message must be non-empty")
    bundle = bundle or PromptBundle()
    system, user = bundle.render("intent", {"message": message})
    runner = _StageRunner(provider, "trace-intent", clock)
    label = None
    try:
        record = runner.call("intent", system, user, params_profile("BACKGROUND"))
        candidate = record.response.text.strip().strip("\"'.`").lower()
        if candidate in ("edit", "question"):
            label = candidate
    except ProviderError:
        label = None
    if label is None:
        label = (
            "edit"
            if any(p.search(message) for p in _EDIT_PATTERNS)
            else "question"
        )
    return label


def _summarize_changes(old: StudyPlan, new: StudyPlan) -> str:
    changes = diff_plans(old, new)
    if not changes:
        return f"Re-ran the plan; content is unchanged (now version {new.version})."
    paths = [c.path for c in changes]
    shown = ", ".join(paths[:12])
    if len(paths) > 12:
        shown += f", … ({len(paths) - 12} more)"
    return (
        f"Updated the plan to version {new.version} with {len(paths)} "
        f"change(s): {shown}"
    )


def handle_chat(
    plan: StudyPlan,
    message: str,
    provider: Provider,
    catalog: Catalog,
    *,
    bundle: PromptBundle | None = None,
    clock: Clock = utc_now_iso,
) -> ChatResult:
    """Route a chat message: edits re-run the pipeline, questions get a
    targeted answer grounded in the serialized current plan."""
    if not message.strip():
        raise PreconditionError("message must be non-empty")
    bundle = bundle or PromptBundle()
    intent = classify_intent(message, provider, bundle=bundle, clock=clock)
    if intent == "edit":
        new_plan, trace = _regenerate(
            plan,
            plan.profile,
            provider,
            catalog,
            bundle=bundle,
            clock=clock,
            instruction=message,
        )
        reply = _summarize_changes(plan, new_plan)
        turns = (
            ChatTurn("user", message, plan.version, intent),
            ChatTurn("system", reply, new_plan.version),
        )
        return ChatResult(reply, intent, new_plan, trace, turns)

    system, user = bundle.render(
        "chat_answer",
        {"plan_document": serialize_plan(plan), "message": message},
    )
    runner = _StageRunner(provider, "trace-chat", clock)
    record = runner.call("chat_answer", system, user, params_profile("BACKGROUND"))
    reply = record.response.text
    turns = (
        ChatTurn("user", message, plan.version, intent),
        ChatTurn("system", reply, plan.version),
    )
    return ChatResult(reply, intent, None, None, turns)
