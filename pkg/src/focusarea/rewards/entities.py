"""Entity extraction backends and discriminative-entity selection."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

# An extractor maps text to the list of entity mentions it contains (repeats kept).
EntityExtractor = Callable[[str], list[str]]


def normalize_entity(text: str) -> str:
    return " ".join(text.lower().split())


def _phrase_pattern(phrase: str) -> str:
    words = [re.escape(w) for w in phrase.split()]
    return r"(?<!\w)" + r"\s+".join(words) + r"(?!\w)"


class DictionaryNER:
    """Matches a fixed entity list, case-insensitively, on word boundaries.

    Longer entities win over shorter ones sharing a span.
    """

    def __init__(self, entities: Iterable[str]):
        self.entities = sorted({normalize_entity(e) for e in entities if e.strip()}, key=lambda e: (-len(e), e))
        if self.entities:
            alternation = "|".join(_phrase_pattern(e) for e in self.entities)
            self._regex = re.compile(alternation, re.IGNORECASE)
        else:
            self._regex = None

    def __call__(self, text: str) -> list[str]:
        if self._regex is None:
            return []
        return [normalize_entity(m.group(0)) for m in self._regex.finditer(text)]


_STOP_CAPS = {
    "a", "an", "and", "as", "at", "but", "by", "focus", "for", "from", "he", "her", "his", "how",
    "i", "in", "is", "it", "its", "of", "on", "or", "she", "that", "the", "their", "they", "this",
    "to", "user", "users", "we", "what", "when", "who", "why", "with",
}
_CAP_TOKEN = r"(?:[A-Z][\w\-]*|[A-Z]{2,})(?:'s)?"
_CAP_SPAN = re.compile(rf"{_CAP_TOKEN}(?:\s+{_CAP_TOKEN})*")


def capitalized_span_ner(text: str) -> list[str]:
    """Heuristic extractor: runs of capitalized tokens, minus function words."""
    out = []
    for m in _CAP_SPAN.finditer(text):
        tokens = [t[:-2] if t.endswith("'s") else t for t in m.group(0).split()]
        while tokens and tokens[0].lower() in _STOP_CAPS:
            tokens = tokens[1:]
        while tokens and tokens[-1].lower() in _STOP_CAPS:
            tokens = tokens[:-1]
        if tokens:
            out.append(normalize_entity(" ".join(tokens)))
    return out


@dataclass(frozen=True)
class DiscriminativeEntitySet:
    entities: frozenset[str]
    per_community_counts: Mapping[str, tuple[int, int]]


def discriminative_entities(
    c1_summaries: Sequence[str],
    c2_summaries: Sequence[str],
    ner: EntityExtractor,
) -> DiscriminativeEntitySet:
    """Entities that separate the two gold communities.

    Kept when mentioned more than once within some community's summaries and
    strictly more often by one community than the other.
    """
    c1 = Counter(normalize_entity(e) for s in c1_summaries for e in ner(s))
    c2 = Counter(normalize_entity(e) for s in c2_summaries for e in ner(s))
    counts = {}
    for ent in sorted(set(c1) | set(c2)):
        a, b = c1[ent], c2[ent]
        if max(a, b) > 1 and a != b:
            counts[ent] = (a, b)
    return DiscriminativeEntitySet(frozenset(counts), counts)


def mentioned_entities(text: str, entities: Iterable[str]) -> set[str]:
    """Distinct entities present in ``text`` (case-insensitive, word-bounded)."""
    found = set()
    for ent in entities:
        ent = normalize_entity(ent)
        if ent and re.search(_phrase_pattern(ent), text, re.IGNORECASE):
            found.add(ent)
    return found
