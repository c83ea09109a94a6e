"""Everything that talks to the frozen task LLM."""

from .backends import (
    Backend,
    BackendError,
    BackendResponse,
    CacheMissError,
    HTTPChatBackend,
    ReplayCache,
    ScriptedBackend,
    ScriptRule,
    TransientBackendError,
    cache_key,
    complete,
    complete_many,
)
from .parsing import SEPARATOR, parse_community_response
from .prompts import (
    PromptRequest,
    TemplateId,
    alias,
    detection_aliases,
    load_templates,
    render_detection_prompt,
    render_gold_focus_prompt,
    render_informative_prompt,
    render_summarize_prompt,
    select_texts,
    use_templates,
)
from .tasks import (
    clean_focus_text,
    detect_community,
    generate_gold_focus_area,
    ordering_references,
    strip_ordering_references,
    summarize_sample,
    summarize_user,
)

__all__ = [name for name in dir() if not name.startswith("_")]
