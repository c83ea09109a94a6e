"""Text-in/text-out backends for the task LLM, with retries and a replay cache."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import requests

from .prompts import PromptRequest, TemplateId

log = logging.getLogger(__name__)


class BackendError(RuntimeError):
    """A backend could not produce a response."""


class TransientBackendError(BackendError):
    """Timeouts, connection drops, rate limits; worth retrying."""


class CacheMissError(BackendError):
    """Strict replay mode saw a request that is not in the cache."""


@dataclass(frozen=True)
class BackendResponse:
    text: str
    cached: bool = False
    latency_ms: int = 0


class Backend(Protocol):
    name: str

    def generate(self, req: PromptRequest) -> str: ...


@dataclass(frozen=True)
class ScriptRule:
    output: str
    template_id: TemplateId | None = None
    pattern: str | None = None

    def matches(self, req: PromptRequest) -> bool:
        if self.template_id is not None and TemplateId(self.template_id) is not req.template_id:
            return False
        if self.pattern is not None and not re.search(self.pattern, req.rendered_text, re.DOTALL):
            return False
        return True


class ScriptedBackend:
    """Deterministic mock.

    Per-template ``responders`` (callables on the request) take precedence;
    otherwise the first matching rule's output is returned verbatim.
    """

    name = "scripted"

    def __init__(
        self,
        rules: Iterable[ScriptRule] = (),
        responders: Mapping[TemplateId | str, Callable[[PromptRequest], str]] | None = None,
        default: str | None = None,
    ):
        self.rules = list(rules)
        self.responders = {TemplateId(k): v for k, v in (responders or {}).items()}
        self.default = default
        self.calls = 0

    def generate(self, req: PromptRequest) -> str:
        self.calls += 1
        responder = self.responders.get(req.template_id)
        if responder is not None:
            return responder(req)
        for rule in self.rules:
            if rule.matches(req):
                return rule.output
        if self.default is not None:
            return self.default
        raise BackendError(f"no scripted rule matches a {req.template_id.value} request")

    @classmethod
    def from_json(cls, path: str | Path) -> "ScriptedBackend":
        """Rule file: ``{"rules": [{"template_id", "pattern", "output"}], "default": ...}``."""
        spec = json.loads(Path(path).read_text())
        rules = [
            ScriptRule(r["output"], r.get("template_id"), r.get("pattern")) for r in spec.get("rules", [])
        ]
        return cls(rules, default=spec.get("default"))


class HTTPChatBackend:
    """OpenAI-style chat-completion endpoint; the token is read from an env var."""

    name = "http"

    def __init__(
        self,
        url: str,
        model: str,
        token_env: str = "FOCUSAREA_API_TOKEN",
        timeout: float = 60.0,
        session: requests.Session | None = None,
    ):
        self.url = url
        self.model = model
        self.token_env = token_env
        self.timeout = timeout
        self.session = session or requests.Session()

    def generate(self, req: PromptRequest) -> str:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        model = self.model if req.model_hint in ("", "default") else req.model_hint
        payload = {
            "model": model,
            "messages": [{"role": "user", "content": req.rendered_text}],
            "max_tokens": req.max_tokens,
            "temperature": req.temperature,
        }
        try:
            resp = self.session.post(self.url, json=payload, headers=headers, timeout=self.timeout)
        except (requests.Timeout, requests.ConnectionError) as exc:
            raise TransientBackendError(f"{type(exc).__name__}: {exc}") from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientBackendError(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"malformed chat-completion response: {exc}") from exc


def cache_key(req: PromptRequest) -> str:
    blob = json.dumps(
        [req.template_id.value, req.rendered_text, req.model_hint, float(req.temperature)],
        ensure_ascii=False,
    )
    return hashlib.sha256(blob.encode()).hexdigest()


class ReplayCache:
    """Append-only JSONL cache in front of an optional live backend.

    In strict mode, or without an inner backend, a miss raises
    :class:`CacheMissError`.
    """

    name = "replay"

    def __init__(self, path: str | Path, inner: Backend | None = None, strict: bool = False):
        self.path = Path(path)
        self.inner = inner
        self.strict = strict
        self._lock = threading.Lock()
        self._entries: dict[str, str] = {}
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self._entries[rec["key"]] = rec["response"]

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, req: PromptRequest) -> str | None:
        return self._entries.get(cache_key(req))

    def store(self, req: PromptRequest, text: str) -> None:
        key = cache_key(req)
        rec = {
            "key": key,
            "template_id": req.template_id.value,
            "prompt": req.rendered_text,
            "response": text,
            "model": req.model_hint,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        with self._lock:
            if key in self._entries:
                return
            self._entries[key] = text
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")

    def generate(self, req: PromptRequest) -> str:
        return complete(req, self).text


def _call_with_retries(
    fn: Callable[[PromptRequest], str],
    req: PromptRequest,
    attempts: int,
    base_delay: float,
    sleep: Callable[[float], None],
) -> str:
    for attempt in range(1, attempts + 1):
        try:
            return fn(req)
        except TransientBackendError as exc:
            if attempt == attempts:
                raise BackendError(f"giving up after {attempts} attempts: {exc}") from exc
            delay = base_delay * 2 ** (attempt - 1)
            log.warning("transient backend error (%s), retry %d/%d in %.2fs", exc, attempt, attempts, delay)
            sleep(delay)
    raise AssertionError("unreachable")


def complete(
    req: PromptRequest,
    backend: Backend,
    *,
    attempts: int = 3,
    base_delay: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
) -> BackendResponse:
    """Send one request, retrying transient failures with exponential backoff."""
    t0 = time.monotonic()
    if isinstance(backend, ReplayCache):
        hit = backend.lookup(req)
        if hit is not None:
            return BackendResponse(hit, True, int((time.monotonic() - t0) * 1000))
        if backend.strict or backend.inner is None:
            raise CacheMissError(f"no cached response for {req.template_id.value} request {cache_key(req)[:12]}")
        text = _call_with_retries(backend.inner.generate, req, attempts, base_delay, sleep)
        backend.store(req, text)
    else:
        text = _call_with_retries(backend.generate, req, attempts, base_delay, sleep)
    if text is None:
        raise BackendError("backend returned no text")
    return BackendResponse(text, False, int((time.monotonic() - t0) * 1000))


def complete_many(
    reqs: Sequence[PromptRequest],
    backend: Backend,
    *,
    parallelism: int = 1,
    **kwargs,
) -> list[BackendResponse]:
    """Complete requests with at most ``parallelism`` in flight; order is preserved."""
    if parallelism <= 1:
        return [complete(r, backend, **kwargs) for r in reqs]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(lambda r: complete(r, backend, **kwargs), reqs))
