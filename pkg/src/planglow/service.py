"""HTTP API tying the engine together for the web client and CLI.

All endpoints live under /v1. Mutations use optimistic versioning (the body
carries expected_version; a mismatch returns 409 with the current version)
and each successful call appends exactly one interaction event, plus one plan
version when the plan changed. Test mode wires the scripted provider and mock
catalog, so the whole API runs with zero network egress.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Header, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import (
    CatalogTransportError,
    NotFoundError,
    PlanGlowError,
    PlanParseError,
    PlanSchemaError,
    PreconditionError,
    ProviderError,
    RepairFailedError,
    VersionConflictError,
)
from .lint import lint_plan
from .model import (
    BackgroundLevel,
    LearnerProfile,
    StudyPlan,
    deserialize_plan,
    serialize_plan,
    validate_profile,
)
from .pipeline import (
    Clock,
    IdFactory,
    PromptBundle,
    content_plan_id,
    create_plan,
    describe_background_levels,
    random_plan_id,
    utc_now_iso,
)
from .providers import LiveProvider, LiveProviderConfig, Provider, load_transcript
from .resources import (
    AlternativeQuery,
    Catalog,
    MockCatalog,
    YouTubeCatalog,
    replace_resource,
    search_alternatives,
)
from .revision import InlineEdit, apply_inline_edit, handle_chat
from .storage import EVENT_TYPES, PlanStore
from .testing import scripted_clock

logger = logging.getLogger("planglow.service")

ENV_MODE = "PLANGLOW_MODE"
ENV_DATA_DIR = "PLANGLOW_DATA_DIR"
ENV_FIXTURES = "PLANGLOW_FIXTURES"
ENV_CATALOG_FILE = "PLANGLOW_CATALOG_FILE"
ENV_TEMPLATE_DIR = "PLANGLOW_TEMPLATE_DIR"

FIXTURE_DIR = Path(__file__).parent / "fixtures"
DEFAULT_TRANSCRIPT = FIXTURE_DIR / "golden_transcript.json"
DEFAULT_CATALOG = FIXTURE_DIR / "mock_catalog.json"


@dataclass
class ServiceConfig:
    mode: str
    data_dir: Path
    provider: Provider
    catalog: Catalog
    bundle: PromptBundle = field(default_factory=PromptBundle)
    clock: Clock = utc_now_iso
    id_factory: IdFactory = random_plan_id

    @classmethod
    def test_mode(
        cls,
        data_dir: str | Path,
        *,
        transcript_path: str | Path = DEFAULT_TRANSCRIPT,
        catalog_path: str | Path = DEFAULT_CATALOG,
        template_dir: str | Path | None = None,
    ) -> "ServiceConfig":
        return cls(
            mode="test",
            data_dir=Path(data_dir),
            provider=load_transcript(transcript_path),
            catalog=MockCatalog.from_file(catalog_path),
            bundle=PromptBundle(template_dir) if template_dir else PromptBundle(),
            clock=scripted_clock,
            id_factory=content_plan_id,
        )

    @classmethod
    def live_mode(
        cls, data_dir: str | Path, *, template_dir: str | Path | None = None
    ) -> "ServiceConfig":
        return cls(
            mode="live",
            data_dir=Path(data_dir),
            provider=LiveProvider(LiveProviderConfig.from_env()),
            catalog=YouTubeCatalog(),
            bundle=PromptBundle(template_dir) if template_dir else PromptBundle(),
        )

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        mode = os.environ.get(ENV_MODE, "test")
        data_dir = Path(os.environ.get(ENV_DATA_DIR, "./planglow-data"))
        template_dir = os.environ.get(ENV_TEMPLATE_DIR)
        if mode == "live":
            return cls.live_mode(data_dir, template_dir=template_dir)
        return cls.test_mode(
            data_dir,
            transcript_path=os.environ.get(ENV_FIXTURES, DEFAULT_TRANSCRIPT),
            catalog_path=os.environ.get(ENV_CATALOG_FILE, DEFAULT_CATALOG),
            template_dir=template_dir,
        )


class CreatePlanBody(BaseModel):
    subject: str
    goal: str
    background_level: str
    duration_weeks: int
    daily_minutes: int
    preferred_media: list[str] | None = None


class EditBody(BaseModel):
    field: str
    new_value: Any
    expected_version: int


class ChatBody(BaseModel):
    message: str
    expected_version: int | None = None


class ReplaceResourceBody(BaseModel):
    week: int
    day: int
    old_external_id: str
    new_external_id: str
    expected_version: int


class EventBody(BaseModel):
    event_type: str
    plan_id: str | None = None
    payload: dict[str, str] = Field(default_factory=dict)


def _profile_from_body(body: CreatePlanBody) -> LearnerProfile:
    try:
        level = BackgroundLevel(body.background_level)
    except ValueError:
        raise PreconditionError(
            f"unknown background level {body.background_level!r}"
        ) from None
    profile = LearnerProfile(
        subject=body.subject,
        goal=body.goal,
        background_level=level,
        duration_weeks=body.duration_weeks,
        daily_minutes=body.daily_minutes,
        preferred_media=tuple(body.preferred_media) if body.preferred_media else None,
    )
    problems = validate_profile(profile)
    if problems:
        raise PreconditionError(
            "; ".join(f"{v.path}: {v.message}" for v in problems)
        )
    return profile


def _plan_response(document: str, status_code: int = 200) -> Response:
    """Plan documents go out as their exact canonical bytes."""
    return Response(
        content=document, media_type="application/json", status_code=status_code
    )


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    store = PlanStore(config.data_dir)
    app = FastAPI(title="planglow", version="0.1.0")
    app.state.config = config
    app.state.store = store

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.middleware("http")
    async def request_log(request: Request, call_next):
        started = time.monotonic()
        response = await call_next(request)
        latency_ms = int((time.monotonic() - started) * 1000)
        logger.info(
            "%s %s %s %dms",
            request.method,
            request.url.path,
            response.status_code,
            latency_ms,
        )
        return response

    @app.exception_handler(RequestValidationError)
    async def body_validation_handler(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": "validation", "detail": exc.errors()},
        )

    @app.exception_handler(PlanGlowError)
    async def domain_error_handler(_request: Request, exc: PlanGlowError):
        if isinstance(exc, VersionConflictError):
            return JSONResponse(
                status_code=409,
                content={
                    "error": exc.code,
                    "detail": exc.message,
                    "current_version": exc.current_version,
                },
            )
        if isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, (ProviderError, CatalogTransportError, RepairFailedError)):
            status = 502
        elif isinstance(
            exc, (PreconditionError, PlanSchemaError, PlanParseError)
        ):
            status = 400
        else:
            status = 500
        content = {"error": exc.code, "detail": exc.message}
        stage = getattr(exc, "stage_tag", None)
        if stage:
            content["stage"] = stage
        return JSONResponse(status_code=status, content=content)

    def record_event(
        session_id: str,
        event_type: str,
        plan_id: str | None = None,
        payload: dict[str, str] | None = None,
    ) -> None:
        store.append_event(
            session_id, event_type, plan_id, payload or {}, config.clock()
        )

    def load_plan(plan_id: str, version: int | None = None) -> StudyPlan:
        return deserialize_plan(store.get_document(plan_id, version))

    def fresh_plan_id(profile: LearnerProfile) -> str:
        base = config.id_factory(profile)
        candidate, n = base, 1
        while store.has_plan(candidate):
            n += 1
            candidate = f"{base}-{n}"
        return candidate

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "mode": config.mode}

    @app.get("/v1/levels")
    def levels(
        subject: str = Query(...),
        x_session_id: str = Header(default="anonymous"),
    ):
        descriptions = describe_background_levels(
            subject, config.provider, bundle=config.bundle, clock=config.clock
        )
        record_event(
            x_session_id, "viewed_level_descriptions", payload={"subject": subject}
        )
        return {
            "subject": subject,
            "levels": {level.value: text for level, text in descriptions.items()},
        }

    @app.post("/v1/plans", status_code=201)
    def create(body: CreatePlanBody, x_session_id: str = Header(default="anonymous")):
        profile = _profile_from_body(body)
        plan_id = fresh_plan_id(profile)
        plan, trace, _replacements = create_plan(
            profile,
            config.provider,
            config.catalog,
            bundle=config.bundle,
            clock=config.clock,
            id_factory=lambda _profile: plan_id,
        )
        document = serialize_plan(plan)
        store.append_version(
            plan.plan_id, plan.version, document, trace.to_dict(), expected_head=0
        )
        record_event(
            x_session_id, "submitted_form", plan.plan_id, {"subject": profile.subject}
        )
        return _plan_response(document, status_code=201)

    @app.get("/v1/plans/{plan_id}")
    def get_plan(plan_id: str):
        return _plan_response(store.get_document(plan_id))

    @app.get("/v1/plans/{plan_id}/versions")
    def list_versions(plan_id: str):
        versions = store.versions(plan_id)
        return {"plan_id": plan_id, "versions": versions, "head": versions[-1]}

    @app.get("/v1/plans/{plan_id}/versions/{version}")
    def get_version(plan_id: str, version: int):
        return _plan_response(store.get_document(plan_id, version))

    @app.get("/v1/plans/{plan_id}/versions/{version}/trace")
    def get_trace(plan_id: str, version: int):
        return store.get_trace(plan_id, version)

    @app.get("/v1/plans/{plan_id}/lint")
    def lint(plan_id: str):
        report = lint_plan(load_plan(plan_id))
        return report.to_dict()

    @app.post("/v1/plans/{plan_id}/edits")
    def inline_edit(
        plan_id: str,
        body: EditBody,
        x_session_id: str = Header(default="anonymous"),
    ):
        plan = load_plan(plan_id)
        if body.expected_version != plan.version:
            raise VersionConflictError(plan.version)
        edit = InlineEdit.from_raw(body.field, body.new_value)
        new_plan, trace = apply_inline_edit(
            plan,
            edit,
            config.provider,
            config.catalog,
            bundle=config.bundle,
            clock=config.clock,
        )
        document = serialize_plan(new_plan)
        store.append_version(
            plan_id,
            new_plan.version,
            document,
            trace.to_dict(),
            expected_head=plan.version,
        )
        record_event(x_session_id, "inline_edit", plan_id, {"field": edit.field})
        return _plan_response(document)

    @app.post("/v1/plans/{plan_id}/chat")
    def chat(
        plan_id: str,
        body: ChatBody,
        x_session_id: str = Header(default="anonymous"),
    ):
        plan = load_plan(plan_id)
        result = handle_chat(
            plan,
            body.message,
            config.provider,
            config.catalog,
            bundle=config.bundle,
            clock=config.clock,
        )
        payload: dict[str, Any] = {
            "reply": result.reply,
            "intent": result.intent,
            "version": plan.version,
        }
        if result.plan is not None:
            if body.expected_version is not None and body.expected_version != plan.version:
                raise VersionConflictError(plan.version)
            document = serialize_plan(result.plan)
            store.append_version(
                plan_id,
                result.plan.version,
                document,
                result.trace.to_dict() if result.trace else None,
                expected_head=plan.version,
            )
            payload["version"] = result.plan.version
            payload["plan"] = json.loads(document)
        record_event(
            x_session_id, "chat_message", plan_id, {"intent": result.intent}
        )
        return payload

    @app.get("/v1/plans/{plan_id}/alternatives")
    def alternatives(
        plan_id: str,
        week: int = Query(..., ge=1),
        day: int = Query(..., ge=1),
        resource: str | None = Query(default=None),
        limit: int = Query(default=10, ge=1, le=10),
        x_session_id: str = Header(default="anonymous"),
    ):
        plan = load_plan(plan_id)
        week_plan = next((w for w in plan.weeks if w.index == week), None)
        if week_plan is None:
            raise NotFoundError(f"no week with index {week}")
        day_plan = next((d for d in week_plan.days if d.index == day), None)
        if day_plan is None:
            raise NotFoundError(f"no day with index {day} in week {week}")
        budget = plan.profile.daily_minutes * 60
        if resource is not None:
            if all(r.external_id != resource for r in day_plan.resources):
                raise NotFoundError(
                    f"resource {resource!r} not found in week {week} day {day}"
                )
            budget -= sum(
                r.duration_seconds
                for r in day_plan.resources
                if r.external_id != resource
            )
        query = AlternativeQuery(
            topic=day_plan.topic,
            background_level=plan.profile.background_level,
            max_duration_seconds=max(budget, 1),
            limit=limit,
        )
        candidates = search_alternatives(query, config.catalog)
        record_event(
            x_session_id,
            "opened_alternatives",
            plan_id,
            {"week": str(week), "day": str(day)},
        )
        return {
            "topic": day_plan.topic,
            "candidates": [
                {
                    "rank": c.rank,
                    "relevance": c.relevance,
                    "external_id": c.record.external_id,
                    "title": c.record.title,
                    "url": c.record.url,
                    "duration_seconds": c.record.duration_seconds,
                    "views": c.record.views,
                    "likes": c.record.likes,
                    "description": c.record.description,
                }
                for c in candidates
            ],
        }

    @app.post("/v1/plans/{plan_id}/resources/replace")
    def replace_one(
        plan_id: str,
        body: ReplaceResourceBody,
        x_session_id: str = Header(default="anonymous"),
    ):
        plan = load_plan(plan_id)
        if body.expected_version != plan.version:
            raise VersionConflictError(plan.version)
        record = config.catalog.lookup([body.new_external_id]).get(
            body.new_external_id
        )
        if record is None:
            raise NotFoundError(
                f"catalog has no record {body.new_external_id!r}"
            )
        new_plan = replace_resource(
            plan,
            body.week,
            body.day,
            body.old_external_id,
            record,
            now=config.clock(),
        )
        document = serialize_plan(new_plan)
        store.append_version(
            plan_id, new_plan.version, document, None, expected_head=plan.version
        )
        record_event(
            x_session_id,
            "selected_alternative",
            plan_id,
            {"old": body.old_external_id, "new": body.new_external_id},
        )
        return _plan_response(document)

    @app.post("/v1/events", status_code=204)
    def post_event(body: EventBody, x_session_id: str = Header(default="anonymous")):
        if body.event_type not in EVENT_TYPES:
            raise PreconditionError(f"unknown event_type {body.event_type!r}")
        record_event(x_session_id, body.event_type, body.plan_id, body.payload)
        return Response(status_code=204)

    @app.get("/v1/sessions/{session_id}/summary")
    def session_summary(session_id: str):
        return store.summarize_session(session_id).to_dict()

    return app
