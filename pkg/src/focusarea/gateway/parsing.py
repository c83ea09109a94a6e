"""Parse the task LLM's community answer.

Grammar: members before the first ``;;;;;``, non-members after it. Users are
recognized by their prompt alias (``user_3``, ``User 3``, ``user-3``) or by
their id; separators between the letters and digits are tolerated.
"""

from __future__ import annotations

import re
from typing import Collection, Mapping

from ..types import CommunityPrediction

SEPARATOR = ";;;;;"

_LETTER_DIGIT = re.compile(r"(?<![A-Za-z0-9])([A-Za-z]+)[\s_\-]*(\d+)(?![0-9])")
_SPLIT_LETTER_DIGIT = re.compile(r"^([A-Za-z]+)[\s_\-]*(\d+)$")


def _norm_key(token: str) -> str:
    return re.sub(r"[\s_\-]+", "", token).lower()


class _Recognizer:
    def __init__(self, valid_ids: Collection[str], aliases: Mapping[str, str] | None):
        self.keys: dict[str, str] = {}
        self.prefixes: set[str] = set()
        self.opaque: list[str] = []
        for uid in valid_ids:
            m = _SPLIT_LETTER_DIGIT.match(uid)
            if m:
                self.keys[_norm_key(uid)] = uid
                self.prefixes.add(m.group(1).lower())
            else:
                self.opaque.append(uid)
        for name, uid in (aliases or {}).items():
            if uid not in valid_ids:
                continue
            m = _SPLIT_LETTER_DIGIT.match(name)
            if m:
                self.keys[_norm_key(name)] = uid
                self.prefixes.add(m.group(1).lower())
        self._opaque_re = (
            re.compile("|".join(rf"(?<!\w){re.escape(u)}(?!\w)" for u in sorted(self.opaque, key=len, reverse=True)))
            if self.opaque
            else None
        )

    def scan(self, text: str) -> tuple[list[str], list[str]]:
        found, dropped = [], []
        for m in _LETTER_DIGIT.finditer(text):
            key = (m.group(1) + m.group(2)).lower()
            if key in self.keys:
                found.append(self.keys[key])
            elif m.group(1).lower() in self.prefixes:
                dropped.append(m.group(0))
        if self._opaque_re is not None:
            found.extend(m.group(0) for m in self._opaque_re.finditer(text))
        return found, dropped


def parse_community_response(
    raw: str,
    valid_ids: Collection[str],
    aliases: Mapping[str, str] | None = None,
) -> CommunityPrediction:
    """Never raises on malformed text.

    An id named on both sides of the separator goes to the community.
    Id-like tokens that match no valid user are reported in ``dropped``.
    A response without separator puts every recognized user in the community
    and sets ``parse_warning``.
    """
    valid = frozenset(valid_ids)
    rec = _Recognizer(valid, aliases)
    raw = raw if isinstance(raw, str) else str(raw)
    head, sep, tail = raw.partition(SEPARATOR)
    left, dropped_left = rec.scan(head)
    if not sep:
        return CommunityPrediction(frozenset(left), frozenset(), raw, tuple(dropped_left), parse_warning=True)
    right, dropped_right = rec.scan(tail)
    community = frozenset(left)
    remainder = frozenset(right) - community
    return CommunityPrediction(community, remainder, raw, tuple(dropped_left + dropped_right))
