"""Reward functions for focus-area generation and the reward combiner."""

from __future__ import annotations

import math
from typing import Collection, Mapping, Sequence

from ..metrics import dual_coverage
from ..types import CommunityPrediction, FocusArea, RewardVector
from .entities import (
    DictionaryNER,
    DiscriminativeEntitySet,
    EntityExtractor,
    capitalized_span_ner,
    discriminative_entities,
    mentioned_entities,
    normalize_entity,
)
from .informativeness import (
    FEATURE_SPEC_VERSION,
    InformativenessScorer,
    build_informativeness_corpus,
    rf3_score,
    rf3_train,
)
from .rouge import lcs_length, rouge_l

REWARD_ORDER = ("rf1", "rf2", "rf3", "rf4")
_FIELD = {
    "rf1": "rf1_coverage",
    "rf2": "rf2_entity",
    "rf3": "rf3_informativeness",
    "rf4": "rf4_length",
}
ROUGE_WEIGHT = 0.25
ENTITY_TARGET = 3
SHORT_WORDS = 10
LONG_WORDS = 35


def _text(focus: FocusArea | str) -> str:
    return focus.text if isinstance(focus, FocusArea) else focus


def rf1(pred: CommunityPrediction, gold_c1: Collection[str], gold_c2: Collection[str]) -> float:
    return dual_coverage(pred, gold_c1, gold_c2)


def rf2(focus: FocusArea | str, des: DiscriminativeEntitySet | Collection[str]) -> float:
    entities = des.entities if isinstance(des, DiscriminativeEntitySet) else des
    matched = len(mentioned_entities(_text(focus), entities))
    return min(1.0, matched / ENTITY_TARGET)


def word_count(text: str) -> int:
    return len(text.split())


def rf4(focus: FocusArea | str) -> float:
    n = word_count(_text(focus))
    if n < SHORT_WORDS:
        return 0.5
    if n > LONG_WORDS:
        return 1.0
    return (n - SHORT_WORDS) / (LONG_WORDS - SHORT_WORDS) * (1.0 - 0.5) + 0.5


def rouge_reward(focus: FocusArea | str, gold: FocusArea | str) -> float:
    return rouge_l(_text(focus), _text(gold))


def combine_rewards(
    components: RewardVector | Mapping[str, float],
    active: Sequence[str],
    rouge_weight: float = ROUGE_WEIGHT,
) -> float:
    """``rouge_weight * rouge + (1 - rouge_weight) * mean(active components)``.

    ``active`` names rewards as ``rf1``..``rf4``. A missing ROUGE value counts
    as 0 so the active share keeps its fixed weight.
    """
    if not active:
        raise ValueError("at least one reward must be active")
    values = components.as_dict() if isinstance(components, RewardVector) else dict(components)

    def get(name: str) -> float:
        for key in (name, _FIELD.get(name, name)):
            v = values.get(key)
            if v is not None:
                if not (0.0 <= v <= 1.0) or math.isnan(v):
                    raise ValueError(f"{name}={v} outside [0, 1]")
                return float(v)
        raise KeyError(f"reward component {name!r} not computed")

    unknown = set(active) - set(REWARD_ORDER)
    if unknown:
        raise ValueError(f"unknown reward names {sorted(unknown)}")
    mean_active = sum(get(a) for a in active) / len(active)
    rouge = values.get("rouge")
    rouge = 0.0 if rouge is None else float(rouge)
    return rouge_weight * rouge + (1.0 - rouge_weight) * mean_active


__all__ = [
    "DictionaryNER",
    "DiscriminativeEntitySet",
    "EntityExtractor",
    "FEATURE_SPEC_VERSION",
    "InformativenessScorer",
    "REWARD_ORDER",
    "build_informativeness_corpus",
    "capitalized_span_ner",
    "combine_rewards",
    "discriminative_entities",
    "lcs_length",
    "mentioned_entities",
    "normalize_entity",
    "rf1",
    "rf2",
    "rf3_score",
    "rf3_train",
    "rf4",
    "rouge_l",
    "rouge_reward",
    "word_count",
]
