"""High-level LLM tasks: summarize users, detect a community, write gold focus areas."""

from __future__ import annotations

import logging
import re
from typing import Sequence

from ..types import (
    CommunityPrediction,
    FocusArea,
    FocusSource,
    SampleSextet,
    UserRecord,
)
from .backends import Backend, BackendError, complete
from .parsing import parse_community_response
from .prompts import (
    detection_aliases,
    render_detection_prompt,
    render_gold_focus_prompt,
    render_summarize_prompt,
)

log = logging.getLogger(__name__)

ORDERING_PATTERNS = (
    r"\b(?:the\s+)?(?:first|last|second|final|remaining|other)\s+(?:three|3|two|2|few)\s+users?\b",
    r"\b(?:the\s+)?(?:first|second|last|other)\s+(?:group|community|set|half)\b",
    r"\busers?[\s_\-]*\d+(?:\s*(?:-|–|to|through|and|,|&)\s*(?:users?[\s_\-]*)?\d+)*\b",
    r"\bin\s+the\s+order\s+(?:given|listed|presented|shown)\b",
)
_ORDERING_RE = re.compile("|".join(f"(?:{p})" for p in ORDERING_PATTERNS), re.IGNORECASE)
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


def ordering_references(text: str) -> list[str]:
    return [m.group(0) for m in _ORDERING_RE.finditer(text)]


def strip_ordering_references(text: str) -> str:
    """Drop sentences that mention user ordering; fall back to phrase removal."""
    sentences = [s for s in _SENTENCE_SPLIT.split(text.strip()) if s]
    kept = [s for s in sentences if not _ORDERING_RE.search(s)]
    if kept:
        return " ".join(kept)
    cleaned = _ORDERING_RE.sub("", text)
    cleaned = re.sub(r"\b(?:and|or|of|between|for)\s*(?=[,.;:!?]|$)", "", cleaned)
    cleaned = re.sub(r"\s+([,.;:!?])", r"\1", cleaned)
    return " ".join(cleaned.split())


def clean_focus_text(raw: str) -> str:
    """Trim quotes and any preamble before "Focus on"."""
    text = raw.strip().strip('"“”\'').strip()
    m = re.search(r"\bfocus on\b", text, re.IGNORECASE)
    if m and m.start() > 0:
        text = text[m.start():]
    return " ".join(text.split())


def summarize_user(user: UserRecord, backend: Backend, *, seed: int = 0, model_hint: str = "default", **kw) -> UserRecord:
    resp = complete(render_summarize_prompt(user, seed=seed, model_hint=model_hint), backend, **kw)
    summary = resp.text.strip()
    if not summary:
        raise BackendError(f"empty summary for user {user.user_id!r}")
    return user.with_summary(summary)


def summarize_sample(sample: SampleSextet, backend: Backend, *, seed: int = 0, **kw) -> SampleSextet:
    users = tuple(u if u.summary else summarize_user(u, backend, seed=seed, **kw) for u in sample.users)
    return sample.replace(users=users)


def _summaries(users: Sequence[UserRecord], sample_id: str) -> list[str]:
    missing = [u.user_id for u in users if not u.summary]
    if missing:
        raise ValueError(f"sample {sample_id!r}: users without summary: {missing}")
    return [u.summary for u in users]


def detect_community(
    sample: SampleSextet,
    focus: FocusArea,
    backend: Backend,
    *,
    summaries: Sequence[str] | None = None,
    model_hint: str = "default",
    **kw,
) -> CommunityPrediction:
    if summaries is None:
        summaries = _summaries(sample.ordered_users(), sample.sample_id)
    req = render_detection_prompt(sample, summaries, focus, model_hint=model_hint)
    resp = complete(req, backend, **kw)
    pred = parse_community_response(resp.text, sample.user_ids, detection_aliases(sample))
    if pred.parse_warning:
        log.warning("sample %s: response lacks the separator", sample.sample_id)
    return pred


def generate_gold_focus_area(
    sample: SampleSextet,
    backend: Backend,
    *,
    summaries: Sequence[str] | None = None,
    ordering_filter: str = "strip",
    model_hint: str = "default",
    **kw,
) -> FocusArea:
    """Ask the task LLM what separates gold_c1 from gold_c2.

    ``ordering_filter`` is ``"strip"`` (remove ordering references),
    ``"flag"`` (keep text, record references in ``flags``) or ``"off"``.
    """
    if ordering_filter not in ("strip", "flag", "off"):
        raise ValueError(f"unknown ordering_filter {ordering_filter!r}")
    if summaries is None:
        summaries = _summaries(sample.gold_sorted_users(), sample.sample_id)
    resp = complete(render_gold_focus_prompt(summaries, model_hint=model_hint), backend, **kw)
    text = clean_focus_text(resp.text)
    refs = ordering_references(text)
    if refs and ordering_filter == "strip":
        text = strip_ordering_references(text)
    if not text:
        raise BackendError(f"sample {sample.sample_id!r}: no usable gold focus area in {resp.text!r}")
    flags = tuple(f"ordering:{r}" for r in refs) if ordering_filter != "off" else ()
    return FocusArea(text, FocusSource.GOLD_LLM, flags)
