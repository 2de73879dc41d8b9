"""Append-only persistence: plan versions, traces, and the interaction log.

Three JSON-lines files under one data directory; documents are stored as the
exact canonical text they were serialized to, so a re-read is byte-identical
to what was written. Version appends go through a single lock doing
compare-and-append, which is what makes optimistic versioning race-safe.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import NotFoundError, VersionConflictError

EVENT_TYPES = frozenset(
    {
        "viewed_level_descriptions",
        "submitted_form",
        "inline_edit",
        "chat_message",
        "viewed_week_explanation",
        "viewed_day_explanation",
        "opened_alternatives",
        "selected_alternative",
    }
)


@dataclass(frozen=True)
class InteractionEvent:
    session_id: str
    event_type: str
    plan_id: str | None
    payload: dict[str, str]
    at: str

    def __post_init__(self):
        if self.event_type not in EVENT_TYPES:
            raise ValueError(f"unknown event_type {self.event_type!r}")

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "event_type": self.event_type,
            "plan_id": self.plan_id,
            "payload": dict(self.payload),
            "at": self.at,
        }


@dataclass(frozen=True)
class SessionSummary:
    counts: dict[str, int] = field(default_factory=dict)
    plans_created: int = 0
    edits_applied: int = 0

    def to_dict(self) -> dict:
        return {
            "counts": dict(self.counts),
            "plans_created": self.plans_created,
            "edits_applied": self.edits_applied,
        }


def summarize_events(events: list[InteractionEvent]) -> SessionSummary:
    """Fold a session's event list into per-type counts and derived totals.

    An edit is "applied" when it produced a new plan version: every
    inline_edit event, plus chat_message events whose payload carries
    intent=edit.
    """
    counts = {name: 0 for name in sorted(EVENT_TYPES)}
    edits_applied = 0
    for event in events:
        counts[event.event_type] += 1
        if event.event_type == "inline_edit":
            edits_applied += 1
        elif (
            event.event_type == "chat_message"
            and event.payload.get("intent") == "edit"
        ):
            edits_applied += 1
    return SessionSummary(
        counts=counts,
        plans_created=counts["submitted_form"],
        edits_applied=edits_applied,
    )


class PlanStore:
    """File-backed store keyed (plan_id, version) plus the event log."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._plans_path = self.data_dir / "plans.jsonl"
        self._traces_path = self.data_dir / "traces.jsonl"
        self._events_path = self.data_dir / "events.jsonl"
        self._lock = threading.Lock()
        self._documents: dict[str, dict[int, str]] = {}
        self._traces: dict[tuple[str, int], dict] = {}
        self._events: list[InteractionEvent] = []
        self._load()

    def _load(self) -> None:
        if self._plans_path.exists():
            for line in self._plans_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                record = json.loads(line)
                self._documents.setdefault(record["plan_id"], {})[
                    record["version"]
                ] = record["document"]
        if self._traces_path.exists():
            for line in self._traces_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                record = json.loads(line)
                self._traces[(record["plan_id"], record["version"])] = record["trace"]
        if self._events_path.exists():
            for line in self._events_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                record = json.loads(line)
                self._events.append(
                    InteractionEvent(
                        session_id=record["session_id"],
                        event_type=record["event_type"],
                        plan_id=record.get("plan_id"),
                        payload=record.get("payload", {}),
                        at=record["at"],
                    )
                )

    @staticmethod
    def _append_line(path: Path, payload: dict) -> None:
        with path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(payload, ensure_ascii=False) + "\n")

    # -- plan versions ------------------------------------------------------

    def has_plan(self, plan_id: str) -> bool:
        return plan_id in self._documents

    def head_version(self, plan_id: str) -> int:
        versions = self._documents.get(plan_id)
        if not versions:
            raise NotFoundError(f"unknown plan {plan_id!r}")
        return max(versions)

    def versions(self, plan_id: str) -> list[int]:
        versions = self._documents.get(plan_id)
        if not versions:
            raise NotFoundError(f"unknown plan {plan_id!r}")
        return sorted(versions)

    def get_document(self, plan_id: str, version: int | None = None) -> str:
        versions = self._documents.get(plan_id)
        if not versions:
            raise NotFoundError(f"unknown plan {plan_id!r}")
        if version is None:
            version = max(versions)
        if version not in versions:
            raise NotFoundError(f"plan {plan_id!r} has no version {version}")
        return versions[version]

    def get_trace(self, plan_id: str, version: int) -> dict:
        key = (plan_id, version)
        if key not in self._traces:
            raise NotFoundError(f"no trace stored for {plan_id!r} v{version}")
        return self._traces[key]

    def append_version(
        self,
        plan_id: str,
        version: int,
        document: str,
        trace: dict | None = None,
        *,
        expected_head: int | None = None,
    ) -> None:
        """Compare-and-append one new version; history is immutable."""
        with self._lock:
            versions = self._documents.get(plan_id, {})
            head = max(versions) if versions else 0
            if expected_head is not None and head != expected_head:
                raise VersionConflictError(head)
            if version != head + 1:
                raise VersionConflictError(head)
            self._append_line(
                self._plans_path,
                {"plan_id": plan_id, "version": version, "document": document},
            )
            self._documents.setdefault(plan_id, {})[version] = document
            if trace is not None:
                self._append_line(
                    self._traces_path,
                    {"plan_id": plan_id, "version": version, "trace": trace},
                )
                self._traces[(plan_id, version)] = trace

    # -- interaction events -------------------------------------------------

    def append_event(
        self,
        session_id: str,
        event_type: str,
        plan_id: str | None,
        payload: dict[str, str],
        at: str,
    ) -> InteractionEvent:
        with self._lock:
            # Stored timestamps are monotone per session even if the caller's
            # clock jumps backwards.
            last = max(
                (e.at for e in self._events if e.session_id == session_id),
                default="",
            )
            event = InteractionEvent(
                session_id=session_id,
                event_type=event_type,
                plan_id=plan_id,
                payload=dict(payload),
                at=max(at, last),
            )
            self._append_line(self._events_path, event.to_dict())
            self._events.append(event)
            return event

    def events(self, session_id: str) -> list[InteractionEvent]:
        return [e for e in self._events if e.session_id == session_id]

    def summarize_session(self, session_id: str) -> SessionSummary:
        """Fold over the stored events; a session with none is all zeros."""
        return summarize_events(self.events(session_id))
