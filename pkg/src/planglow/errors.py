"""Exception types shared across the engine and service layers."""

from __future__ import annotations


class PlanGlowError(Exception):
    """Base class for all domain errors. ``code`` is machine-parseable."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def oneline(self) -> str:
        return f"{self.code}: {self.message}"


class PlanParseError(PlanGlowError):
    """Malformed plan document (not valid JSON). Carries the position."""

    code = "plan-parse"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class PlanSchemaError(PlanGlowError):
    """Well-formed document that violates the plan schema.

    ``path`` names the first offending field; ``violations`` carries every
    violation found (used by the repair path).
    """

    code = "plan-schema"

    def __init__(self, path: str, message: str, violations=None):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.violations = list(violations or [])


class PreconditionError(PlanGlowError):
    """An operation was invoked on input that fails its precondition."""

    code = "precondition"


class ProviderError(PlanGlowError):
    """Text-generation provider failure (transport, auth, truncation)."""

    code = "provider"

    def __init__(self, message: str, stage_tag: str | None = None):
        super().__init__(message)
        self.stage_tag = stage_tag


class MissingFixtureError(ProviderError):
    """Scripted provider has no entry for the requested key."""

    code = "missing-fixture"

    def __init__(self, stage_tag: str, fingerprint: str):
        super().__init__(
            f"no fixture entry for key ({stage_tag}, {fingerprint})", stage_tag
        )
        self.fingerprint = fingerprint


class TranscriptError(PlanGlowError):
    """Transcript fixture file is malformed or self-inconsistent."""

    code = "transcript"


class RepairFailedError(PlanGlowError):
    """A model response stayed unusable after the single repair re-prompt."""

    code = "repair-failed"

    def __init__(self, stage_tag: str, reasons):
        super().__init__(
            f"stage '{stage_tag}' output unusable after repair: "
            + "; ".join(str(r) for r in reasons)
        )
        self.stage_tag = stage_tag
        self.reasons = list(reasons)


class CatalogTransportError(PlanGlowError):
    """Catalog provider could not be reached; distinct from 'invalid'."""

    code = "catalog-transport"


class NotFoundError(PlanGlowError):
    """Addressed plan, version, session, or resource does not exist."""

    code = "not-found"


class VersionConflictError(PlanGlowError):
    """Optimistic-versioning mismatch; carries the current version."""

    code = "version-conflict"

    def __init__(self, current_version: int):
        super().__init__(f"expected version mismatch; current is {current_version}")
        self.current_version = current_version
