"""Study-plan engine: three-stage generation, explanations, resource
validation, interactive revision, and an HTTP service."""

from .model import (
    BackgroundLevel,
    BloomLevel,
    DayPlan,
    LearnerProfile,
    LearningObjective,
    PlanChange,
    Resource,
    StudyPlan,
    Violation,
    WeekPlan,
    deserialize_plan,
    diff_plans,
    plans_equal,
    serialize_plan,
    validate_plan,
)
from .lint import PlanQualityReport, lint_plan
from .pipeline import (
    GenerationTrace,
    PromptBundle,
    StageRecord,
    create_plan,
    describe_background_levels,
    generate_plan,
)
from .providers import (
    GenerationParams,
    ProviderRequest,
    ProviderResponse,
    ScriptedProvider,
    load_transcript,
    profile,
    record_transcript,
)
from .resources import (
    AlternativeQuery,
    CatalogRecord,
    MockCatalog,
    RankedCandidate,
    auto_replace,
    replace_resource,
    replacement_key,
    search_alternatives,
    validate_resource,
)
from .revision import InlineEdit, apply_inline_edit, classify_intent, handle_chat

__version__ = "0.1.0"

__all__ = [
    "AlternativeQuery",
    "BackgroundLevel",
    "BloomLevel",
    "CatalogRecord",
    "DayPlan",
    "GenerationParams",
    "GenerationTrace",
    "InlineEdit",
    "LearnerProfile",
    "LearningObjective",
    "MockCatalog",
    "PlanChange",
    "PlanQualityReport",
    "PromptBundle",
    "ProviderRequest",
    "ProviderResponse",
    "RankedCandidate",
    "Resource",
    "ScriptedProvider",
    "StageRecord",
    "StudyPlan",
    "Violation",
    "WeekPlan",
    "apply_inline_edit",
    "auto_replace",
    "classify_intent",
    "create_plan",
    "describe_background_levels",
    "deserialize_plan",
    "diff_plans",
    "generate_plan",
    "handle_chat",
    "lint_plan",
    "load_transcript",
    "plans_equal",
    "profile",
    "record_transcript",
    "replace_resource",
    "replacement_key",
    "search_alternatives",
    "serialize_plan",
    "validate_plan",
    "validate_resource",
]
