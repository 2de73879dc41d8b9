"""Five-criterion plan quality linter.

Each criterion yields pass/warn/fail with path-addressed findings; the overall
score counts passes. Q4 (progress monitoring) is deliberately lexicon-based
and warns rather than fails: it is the weakest of the five heuristics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import PreconditionError
from .model import (
    EVALUATE_OR_ABOVE,
    FOUNDATIONAL_BLOOM,
    HIGHER_BLOOM,
    StudyPlan,
    validate_plan,
)

PASS = "pass"
WARN = "warn"
FAIL = "fail"

CRITERIA = ("Q1", "Q2", "Q3", "Q4", "Q5")

CRITERION_TITLES = {
    "Q1": "clear and specific learning objectives",
    "Q2": "timeline fits the stated duration and daily availability",
    "Q3": "activities backed by usable resources",
    "Q4": "methods to monitor and measure progress",
    "Q5": "rationales and connections present throughout",
}

DEFAULT_PROGRESS_LEXICON = (
    "quiz",
    "self-assess",
    "self-assessment",
    "checkpoint",
    "check your",
    "test yourself",
    "review what",
    "reflect",
    "measure your progress",
    "track your progress",
    "milestone",
)


@dataclass(frozen=True)
class CriterionResult:
    status: str
    findings: tuple[str, ...] = ()


@dataclass(frozen=True)
class PlanQualityReport:
    criteria: dict[str, CriterionResult] = field(default_factory=dict)

    @property
    def score(self) -> int:
        return sum(1 for r in self.criteria.values() if r.status == PASS)

    @property
    def has_failures(self) -> bool:
        return any(r.status == FAIL for r in self.criteria.values())

    def to_dict(self) -> dict:
        return {
            "criteria": {
                key: {"status": r.status, "findings": list(r.findings)}
                for key, r in self.criteria.items()
            },
            "score": self.score,
        }


def _result(findings: list[str], *, warn_only: bool = False) -> CriterionResult:
    if not findings:
        return CriterionResult(PASS)
    return CriterionResult(WARN if warn_only else FAIL, tuple(findings))


def _q1_objectives(plan: StudyPlan) -> CriterionResult:
    findings = []
    blooms = set()
    for i, week in enumerate(plan.weeks):
        if not week.objectives:
            findings.append(f"weeks[{i}]: no weekly objectives")
        blooms.update(o.bloom_level for o in week.objectives)
        for j, day in enumerate(week.days):
            if not day.objectives:
                findings.append(f"weeks[{i}].days[{j}]: no daily objectives")
            blooms.update(o.bloom_level for o in day.objectives)
    if not blooms & FOUNDATIONAL_BLOOM:
        findings.append("no foundational (remember/understand) objective anywhere")
    if not blooms & HIGHER_BLOOM:
        findings.append("no higher-level objective anywhere")
    return _result(findings)


def _q2_timeline(plan: StudyPlan) -> CriterionResult:
    findings = []
    if len(plan.weeks) != plan.profile.duration_weeks:
        findings.append(
            f"weeks: plan covers {len(plan.weeks)} weeks but the learner asked "
            f"for {plan.profile.duration_weeks}"
        )
    budget = plan.profile.daily_minutes
    for i, week in enumerate(plan.weeks):
        for j, day in enumerate(week.days):
            if day.estimated_minutes > budget:
                findings.append(
                    f"weeks[{i}].days[{j}]: estimated {day.estimated_minutes} min "
                    f"exceeds the {budget} min daily budget"
                )
    return _result(findings)


def _q3_resources(plan: StudyPlan) -> CriterionResult:
    findings = []
    for i, week in enumerate(plan.weeks):
        for j, day in enumerate(week.days):
            for k, res in enumerate(day.resources):
                if res.status not in ("valid", "replaced"):
                    findings.append(
                        f"weeks[{i}].days[{j}].resources[{k}]: "
                        f"status is {res.status!r}"
                    )
    return _result(findings)


def _q4_progress(plan: StudyPlan, lexicon) -> CriterionResult:
    for week in plan.weeks:
        for obj in week.objectives:
            if obj.bloom_level in EVALUATE_OR_ABOVE:
                return CriterionResult(PASS)
        for day in week.days:
            for obj in day.objectives:
                if obj.bloom_level in EVALUATE_OR_ABOVE:
                    return CriterionResult(PASS)
    patterns = [re.compile(re.escape(term), re.IGNORECASE) for term in lexicon]
    texts = []
    for week in plan.weeks:
        texts.append(week.content_rationale)
        texts.append(week.connections)
        texts.extend(day.topic_rationale for day in week.days)
    for text in texts:
        if any(p.search(text) for p in patterns):
            return CriterionResult(PASS)
    return _result(
        ["no evaluate-or-above objective and no progress-check language found"],
        warn_only=True,
    )


def _q5_explanations(plan: StudyPlan) -> CriterionResult:
    findings = []
    for i, week in enumerate(plan.weeks):
        if not week.content_rationale.strip():
            findings.append(f"weeks[{i}].content_rationale: empty")
        if not week.connections.strip():
            findings.append(f"weeks[{i}].connections: empty")
        for j, day in enumerate(week.days):
            if not day.topic_rationale.strip():
                findings.append(f"weeks[{i}].days[{j}].topic_rationale: empty")
    return _result(findings)


def lint_plan(
    plan: StudyPlan, *, progress_lexicon=DEFAULT_PROGRESS_LEXICON
) -> PlanQualityReport:
    """Score a structurally valid plan against the five quality criteria."""
    violations = validate_plan(plan)
    if violations:
        raise PreconditionError(
            f"lint_plan requires a structurally valid plan; first violation: "
            f"{violations[0].path}: {violations[0].message}"
        )
    return PlanQualityReport(
        criteria={
            "Q1": _q1_objectives(plan),
            "Q2": _q2_timeline(plan),
            "Q3": _q3_resources(plan),
            "Q4": _q4_progress(plan, progress_lexicon),
            "Q5": _q5_explanations(plan),
        }
    )
