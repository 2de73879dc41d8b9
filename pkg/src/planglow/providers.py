"""Text-generation provider abstraction.

Two adapters share one interface: a live HTTP chat-completion client and a
deterministic scripted adapter driven by transcript fixtures. Fixture entries
are keyed by (stage_tag, 16-hex fingerprint of the whitespace-normalized user
prompt) so cosmetic system-prompt changes do not invalidate recordings.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

from .errors import MissingFixtureError, ProviderError, TranscriptError

STAGE_TAGS = ("background", "initial", "critique", "improve", "chat_answer", "intent")

ENV_API_KEY = "PLANGLOW_LLM_API_KEY"
ENV_BASE_URL = "PLANGLOW_LLM_BASE_URL"
ENV_MODEL = "PLANGLOW_LLM_MODEL"

# One retry schedule for transport-level failures only; unparseable-but-
# well-formed completions go to the pipeline repair path instead.
RETRY_BACKOFF_SECONDS = (0.5, 2.0, 8.0)

MAX_TOKENS_PLAN = 4096
MAX_TOKENS_SHORT = 1024


@dataclass(frozen=True)
class GenerationParams:
    temperature: float
    top_p: float
    frequency_penalty: float
    presence_penalty: float
    max_tokens: int

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature out of range: {self.temperature}")
        if not 0.0 <= self.top_p <= 1.0:
            raise ValueError(f"top_p out of range: {self.top_p}")
        if not -2.0 <= self.frequency_penalty <= 2.0:
            raise ValueError(f"frequency_penalty out of range: {self.frequency_penalty}")
        if not -2.0 <= self.presence_penalty <= 2.0:
            raise ValueError(f"presence_penalty out of range: {self.presence_penalty}")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be positive: {self.max_tokens}")


# Tuned profiles. BACKGROUND favors factual, low-variance text for the
# expertise-level descriptions; PLAN pins sampling for reproducible plans.
PROFILES: dict[str, GenerationParams] = {
    "BACKGROUND": GenerationParams(
        temperature=0.2,
        top_p=0.6,
        frequency_penalty=0.2,
        presence_penalty=0.1,
        max_tokens=MAX_TOKENS_SHORT,
    ),
    "PLAN": GenerationParams(
        temperature=0.0,
        top_p=0.8,
        frequency_penalty=0.2,
        presence_penalty=0.1,
        max_tokens=MAX_TOKENS_PLAN,
    ),
}


def profile(name: str) -> GenerationParams:
    """Return the tuned parameter set for a profile name."""
    try:
        return PROFILES[name]
    except KeyError:
        raise ProviderError(f"unknown parameter profile {name!r}") from None


@dataclass(frozen=True)
class ProviderRequest:
    request_id: str
    system_prompt: str
    user_prompt: str
    params: GenerationParams
    stage_tag: str

    def __post_init__(self):
        if not self.system_prompt or not self.user_prompt:
            raise ValueError("prompts must be non-empty")
        if self.stage_tag not in STAGE_TAGS:
            raise ValueError(f"unknown stage_tag {self.stage_tag!r}")


@dataclass(frozen=True)
class ProviderResponse:
    text: str
    finish_reason: str = "complete"
    latency_ms: int = 0


class Provider(Protocol):
    def complete(self, request: ProviderRequest) -> ProviderResponse: ...


def normalize_prompt(text: str) -> str:
    """Trim and collapse runs of whitespace; the fingerprint's input form."""
    return " ".join(text.split())


def fingerprint(text: str) -> str:
    """16-hex-digit digest of the normalized prompt text."""
    normalized = normalize_prompt(text)
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class TranscriptEntry:
    stage_tag: str
    prompt_fingerprint: str
    response_text: str


class ScriptedProvider:
    """Deterministic provider backed by a transcript; read-only after load."""

    def __init__(self, entries: list[TranscriptEntry]):
        table: dict[tuple[str, str], str] = {}
        for entry in entries:
            key = (entry.stage_tag, entry.prompt_fingerprint)
            if key in table:
                raise TranscriptError(f"duplicate transcript key {key}")
            table[key] = entry.response_text
        self._table = table

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        key = (request.stage_tag, fingerprint(request.user_prompt))
        try:
            text = self._table[key]
        except KeyError:
            raise MissingFixtureError(*key) from None
        return ProviderResponse(text=text, finish_reason="complete", latency_ms=0)


class RecordingProvider:
    """Wraps another provider and captures every exchange as a transcript."""

    def __init__(self, inner: Provider):
        self._inner = inner
        self.entries: list[TranscriptEntry] = []

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        response = self._inner.complete(request)
        self.entries.append(
            TranscriptEntry(
                stage_tag=request.stage_tag,
                prompt_fingerprint=fingerprint(request.user_prompt),
                response_text=response.text,
            )
        )
        return response


def record_transcript(entries: list[TranscriptEntry], path: str | Path) -> None:
    """Write a transcript fixture file (UTF-8 JSON array)."""
    payload = [
        {
            "stage_tag": e.stage_tag,
            "prompt_fingerprint": e.prompt_fingerprint,
            "response_text": e.response_text,
        }
        for e in entries
    ]
    Path(path).write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def parse_transcript(text: str) -> list[TranscriptEntry]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TranscriptError(
            f"transcript is not valid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})"
        ) from exc
    if not isinstance(payload, list):
        raise TranscriptError("transcript must be a JSON array of entries")
    entries = []
    for i, item in enumerate(payload):
        if not isinstance(item, dict):
            raise TranscriptError(f"entry {i} must be an object")
        try:
            stage_tag = item["stage_tag"]
            fp = item["prompt_fingerprint"]
            text_ = item["response_text"]
        except KeyError as exc:
            raise TranscriptError(f"entry {i} missing field {exc.args[0]!r}") from None
        if stage_tag not in STAGE_TAGS:
            raise TranscriptError(f"entry {i} has unknown stage_tag {stage_tag!r}")
        entries.append(TranscriptEntry(stage_tag, fp, text_))
    return entries


def load_transcript(path: str | Path) -> ScriptedProvider:
    """Load a transcript fixture into a scripted provider."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TranscriptError(f"cannot read transcript {path}: {exc}") from exc
    return ScriptedProvider(parse_transcript(text))


@dataclass
class LiveProviderConfig:
    base_url: str
    api_key: str
    model: str = "gpt-4o"

    @classmethod
    def from_env(cls) -> "LiveProviderConfig":
        base_url = os.environ.get(ENV_BASE_URL, "https://api.openai.com/v1")
        api_key = os.environ.get(ENV_API_KEY, "")
        if not api_key:
            raise ProviderError(f"{ENV_API_KEY} is not set")
        return cls(
            base_url=base_url,
            api_key=api_key,
            model=os.environ.get(ENV_MODEL, "gpt-4o"),
        )


class LiveProvider:
    """HTTP chat-completion client with bounded retry on transport failures."""

    def __init__(
        self,
        config: LiveProviderConfig,
        *,
        transport: httpx.BaseTransport | None = None,
        sleep=time.sleep,
    ):
        self._config = config
        self._sleep = sleep
        self._client = httpx.Client(
            base_url=config.base_url.rstrip("/"),
            headers={"Authorization": f"Bearer {config.api_key}"},
            timeout=60.0,
            transport=transport,
        )

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        payload = {
            "model": self._config.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.params.temperature,
            "top_p": request.params.top_p,
            "frequency_penalty": request.params.frequency_penalty,
            "presence_penalty": request.params.presence_penalty,
            "max_tokens": request.params.max_tokens,
        }
        last_error: Exception | None = None
        started = time.monotonic()
        for attempt, backoff in enumerate(RETRY_BACKOFF_SECONDS):
            try:
                response = self._client.post("/chat/completions", json=payload)
                break
            except httpx.TransportError as exc:
                last_error = exc
                if attempt == len(RETRY_BACKOFF_SECONDS) - 1:
                    raise ProviderError(
                        f"transport failure after {attempt + 1} attempts: {exc}",
                        request.stage_tag,
                    ) from exc
                self._sleep(backoff)
        else:  # pragma: no cover - loop always breaks or raises
            raise ProviderError(str(last_error), request.stage_tag)
        latency_ms = int((time.monotonic() - started) * 1000)
        if response.status_code != 200:
            raise ProviderError(
                f"completion endpoint returned {response.status_code}: "
                f"{response.text[:200]}",
                request.stage_tag,
            )
        body = response.json()
        try:
            choice = body["choices"][0]
            text = choice["message"]["content"] or ""
            finish = choice.get("finish_reason", "stop")
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(
                f"malformed completion payload: {exc}", request.stage_tag
            ) from exc
        return ProviderResponse(
            text=text,
            finish_reason="complete" if finish == "stop" else "truncated",
            latency_ms=latency_ms,
        )


@dataclass
class CountingProvider:
    """Test helper: counts calls per stage_tag while delegating."""

    inner: Provider
    calls: list[ProviderRequest] = field(default_factory=list)

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls.append(request)
        return self.inner.complete(request)

    def count(self, stage_tag: str | None = None) -> int:
        if stage_tag is None:
            return len(self.calls)
        return sum(1 for r in self.calls if r.stage_tag == stage_tag)
