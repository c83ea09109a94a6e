"""Prompt templates and renderers for every call made to the task LLM.

Templates are plain text files with ``$name`` placeholders. The packaged set
can be overridden by passing a directory holding files of the same names.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from string import Template
from typing import Mapping, Sequence

from ..types import SEXTET_SIZE, FocusArea, FocusSource, Platform, SampleSextet, UserRecord


class TemplateId(str, enum.Enum):
    SUMMARIZE_USER = "summarize_user"
    DETECT_COMMUNITY = "detect_community"
    GEN_GOLD_FOCUS = "gen_gold_focus"
    MAKE_INFORMATIVE = "make_informative"


@dataclass(frozen=True)
class PromptRequest:
    template_id: TemplateId
    rendered_text: str
    model_hint: str = "default"
    max_tokens: int = 256
    temperature: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "template_id", TemplateId(self.template_id))
        if not self.rendered_text:
            raise ValueError("rendered_text must be nonempty")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


MAX_TWEETS = 10
TWITTER_METADATA_KEYS = ("bio", "followers", "following", "likes", "tweets", "verified")


def alias(position: int) -> str:
    """Positional user name used in prompts (1-based)."""
    return f"user_{position}"


def load_templates(directory: str | Path | None = None) -> dict[TemplateId, Template]:
    """Packaged templates, each replaced by ``<directory>/<template_id>.txt`` when present."""
    templates = {}
    packaged = resources.files("focusarea") / "templates"
    for tid in TemplateId:
        name = f"{tid.value}.txt"
        override = Path(directory) / name if directory is not None else None
        if override is not None and override.exists():
            text = override.read_text(encoding="utf-8")
        else:
            text = (packaged / name).read_text(encoding="utf-8")
        templates[tid] = Template(text)
    return templates


_DEFAULT_TEMPLATES: dict[TemplateId, Template] | None = None


def use_templates(directory: str | Path | None) -> None:
    """Set the templates used when a renderer is not given any; ``None`` restores the packaged ones."""
    global _DEFAULT_TEMPLATES
    _DEFAULT_TEMPLATES = load_templates(directory)


def _templates(templates: Mapping[TemplateId, Template] | None) -> Mapping[TemplateId, Template]:
    global _DEFAULT_TEMPLATES
    if templates is not None:
        return templates
    if _DEFAULT_TEMPLATES is None:
        _DEFAULT_TEMPLATES = load_templates()
    return _DEFAULT_TEMPLATES


def select_texts(user: UserRecord, seed: int = 0) -> list[str]:
    """Texts shown to the summarizer: all Reddit comments, or 10 sampled tweets."""
    if user.platform is Platform.TWITTER and len(user.raw_texts) > MAX_TWEETS:
        rng = random.Random(f"{seed}:{user.user_id}")
        idx = sorted(rng.sample(range(len(user.raw_texts)), MAX_TWEETS))
        return [user.raw_texts[i] for i in idx]
    return list(user.raw_texts)


def render_summarize_prompt(
    user: UserRecord,
    *,
    seed: int = 0,
    model_hint: str = "default",
    templates: Mapping[TemplateId, Template] | None = None,
) -> PromptRequest:
    if not user.raw_texts:
        raise ValueError(f"user {user.user_id!r} has no texts to summarize")
    texts = select_texts(user, seed)
    if user.platform is Platform.TWITTER:
        label, item = "Twitter", "Tweet"
        meta = [f"Profile {k}: {user.metadata[k]}" for k in TWITTER_METADATA_KEYS if k in user.metadata]
        metadata_block = "\n".join(meta) + "\n" if meta else ""
    else:
        label, item = "Reddit", "Reddit Comment"
        metadata_block = ""
    body = "\n".join(f"{item}: {t}" for t in texts)
    text = _templates(templates)[TemplateId.SUMMARIZE_USER].substitute(
        platform_label=label, metadata_block=metadata_block, texts=body
    )
    return PromptRequest(TemplateId.SUMMARIZE_USER, text, model_hint, max_tokens=200)


def _user_blocks(summaries: Sequence[str]) -> str:
    return "\n".join(f"{alias(i)}: {s.strip()}" for i, s in enumerate(summaries, 1))


def render_detection_prompt(
    sample: SampleSextet,
    summaries: Sequence[str],
    focus: FocusArea,
    *,
    model_hint: str = "default",
    templates: Mapping[TemplateId, Template] | None = None,
) -> PromptRequest:
    """Detection prompt listing users as ``user_1..user_6`` in presentation order.

    ``summaries`` must already follow ``sample.presentation_order``.
    """
    if len(summaries) != SEXTET_SIZE:
        raise ValueError(f"expected {SEXTET_SIZE} summaries, got {len(summaries)}")
    focus_block = "" if focus.source is FocusSource.NONE else focus.text.strip()
    text = _templates(templates)[TemplateId.DETECT_COMMUNITY].substitute(
        user_blocks=_user_blocks(summaries), focus_block=focus_block
    )
    return PromptRequest(TemplateId.DETECT_COMMUNITY, text, model_hint, max_tokens=64)


def detection_aliases(sample: SampleSextet) -> dict[str, str]:
    """Map prompt aliases back to user ids."""
    return {alias(i): uid for i, uid in enumerate(sample.presentation_order, 1)}


def render_gold_focus_prompt(
    summaries: Sequence[str],
    *,
    model_hint: str = "default",
    templates: Mapping[TemplateId, Template] | None = None,
) -> PromptRequest:
    """``summaries`` are ordered gold_c1 first, then gold_c2."""
    if len(summaries) != SEXTET_SIZE:
        raise ValueError(f"expected {SEXTET_SIZE} summaries, got {len(summaries)}")
    text = _templates(templates)[TemplateId.GEN_GOLD_FOCUS].substitute(user_blocks=_user_blocks(summaries))
    return PromptRequest(TemplateId.GEN_GOLD_FOCUS, text, model_hint, max_tokens=96)


def render_informative_prompt(
    focus_text: str,
    *,
    model_hint: str = "default",
    templates: Mapping[TemplateId, Template] | None = None,
) -> PromptRequest:
    if not focus_text.strip():
        raise ValueError("focus text is empty")
    text = _templates(templates)[TemplateId.MAKE_INFORMATIVE].substitute(focus=focus_text.strip())
    return PromptRequest(TemplateId.MAKE_INFORMATIVE, text, model_hint, max_tokens=128, temperature=0.7)
