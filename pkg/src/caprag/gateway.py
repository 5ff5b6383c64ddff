"""Uniform chat-completion interface over HTTP, with a deterministic mock.

HTTP backends POST ``{"system", "user", "max_tokens", "temperature"}`` and
expect ``{"text": ...}`` back; the auth token comes from the environment
variable named in the config. The mock backend replies from a script keyed by
a normalized SHA-256 of the user prompt; on a miss it either echoes the
prompt's context section verbatim (``ECHO_CONTEXT``) or fails (``NONE``).

The default generation parameters (max_tokens 2000, temperature 0.01) keep
remote models as deterministic as they will go; the mock is exactly
deterministic.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import ContractError, GatewayError, TransportError
from .httputil import post_json

# Prompt sections between these markers are what ECHO_CONTEXT extracts; the
# query pipeline builds its prompts with the same markers.
CONTEXT_OPEN = "<<CONTEXT>>"
CONTEXT_CLOSE = "<<END CONTEXT>>"

FALLBACK_ECHO_CONTEXT = "ECHO_CONTEXT"
FALLBACK_NONE = "NONE"


@dataclass(frozen=True)
class GenerationConfig:
    kind: str = "mock"  # "mock" | "http"
    max_tokens: int = 2000
    temperature: float = 0.01
    url: str | None = None
    auth_env: str | None = None
    retry_count: int = 3
    retry_backoff_s: float = 0.5
    mock_script_path: str | None = None
    mock_fallback: str = FALLBACK_ECHO_CONTEXT

    def __post_init__(self):
        if self.kind not in ("mock", "http"):
            raise ContractError(f"unknown gateway kind {self.kind!r}")
        if self.max_tokens <= 0:
            raise ContractError("max_tokens must be positive")
        if self.temperature < 0:
            raise ContractError("temperature must be >= 0")
        if self.kind == "http" and not self.url:
            raise ContractError("http gateway requires a url")
        if self.mock_fallback not in (FALLBACK_ECHO_CONTEXT, FALLBACK_NONE):
            raise ContractError(f"unknown mock fallback {self.mock_fallback!r}")


@dataclass
class ChatExchange:
    system: str
    user: str
    response: str
    latency_s: float
    backend: str
    retries: int = 0


def prompt_hash(user_prompt: str) -> str:
    """SHA-256 hex of the whitespace-normalized user prompt; the mock script key."""
    normalized = " ".join(user_prompt.split())
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()


def extract_context(user_prompt: str) -> str:
    """The text between the context markers, verbatim; empty when absent."""
    start = user_prompt.find(CONTEXT_OPEN)
    if start < 0:
        return ""
    start += len(CONTEXT_OPEN)
    end = user_prompt.find(CONTEXT_CLOSE, start)
    if end < 0:
        return ""
    return user_prompt[start:end].strip("\n")


class MockBackend:
    """Scripted responses by prompt hash; deterministic across runs and platforms."""

    name = "mock"

    def __init__(self, responses: dict[str, str] | None = None, fallback: str = FALLBACK_ECHO_CONTEXT):
        self.responses = dict(responses or {})
        self.fallback = fallback

    @classmethod
    def from_script(cls, path: str | Path) -> "MockBackend":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(responses=raw.get("responses", {}), fallback=raw.get("fallback", FALLBACK_ECHO_CONTEXT))

    def complete(self, system: str, user: str, cfg: GenerationConfig) -> str:
        key = prompt_hash(user)
        if key in self.responses:
            return self.responses[key]
        if self.fallback == FALLBACK_ECHO_CONTEXT:
            return extract_context(user)
        raise GatewayError(f"mock script has no entry for prompt hash {key}")


class HttpBackend:
    name = "http"

    def __init__(self, url: str, auth_env: str | None = None):
        self.url = url
        self.auth_env = auth_env

    def complete(self, system: str, user: str, cfg: GenerationConfig) -> str:
        reply = post_json(
            self.url,
            {
                "system": system,
                "user": user,
                "max_tokens": cfg.max_tokens,
                "temperature": cfg.temperature,
            },
            auth_env=self.auth_env,
        )
        text = reply.get("text")
        if not isinstance(text, str):
            raise TransportError("gateway response missing 'text'")
        return text


class CaptureBackend:
    """Test backend recording every request payload it would have sent."""

    name = "capture"

    def __init__(self, reply: str = ""):
        self.reply = reply
        self.requests: list[dict] = []

    def complete(self, system: str, user: str, cfg: GenerationConfig) -> str:
        self.requests.append(
            {
                "system": system,
                "user": user,
                "max_tokens": cfg.max_tokens,
                "temperature": cfg.temperature,
            }
        )
        return self.reply


def build_backend(cfg: GenerationConfig):
    if cfg.kind == "mock":
        if cfg.mock_script_path:
            backend = MockBackend.from_script(cfg.mock_script_path)
            backend.fallback = cfg.mock_fallback if cfg.mock_fallback else backend.fallback
            return backend
        return MockBackend(fallback=cfg.mock_fallback)
    return HttpBackend(cfg.url, cfg.auth_env)


def complete(system: str, user: str, cfg: GenerationConfig, backend=None) -> ChatExchange:
    """One chat completion with the config's retry policy.

    Transport failures are retried up to ``retry_count`` times with a fixed
    backoff; anything else propagates immediately. After the retries are
    exhausted a GatewayError is raised.
    """
    if backend is None:
        backend = build_backend(cfg)
    started = time.monotonic()
    attempts = 0
    last_error: Exception | None = None
    while attempts <= cfg.retry_count:
        try:
            text = backend.complete(system, user, cfg)
            return ChatExchange(
                system=system,
                user=user,
                response=text,
                latency_s=time.monotonic() - started,
                backend=backend.name,
                retries=attempts,
            )
        except TransportError as exc:
            last_error = exc
            attempts += 1
            if attempts <= cfg.retry_count and cfg.retry_backoff_s > 0:
                time.sleep(cfg.retry_backoff_s)
    raise GatewayError(
        f"backend {backend.name} failed after {cfg.retry_count} retries: {last_error}"
    )
