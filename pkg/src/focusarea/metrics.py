"""Community detection coverage and source-profiling classification metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Iterable, Sequence

import numpy as np

from .types import COMMUNITY_SIZE, CommunityPrediction


@dataclass(frozen=True)
class CoverageBreakdown:
    matched_gold: str  # "c1" or "c2"
    correct: int
    incorrect: int
    missing: int
    coverage: float

    @property
    def precision(self) -> float:
        """correct / (correct + incorrect); diagnostic only."""
        denom = self.correct + self.incorrect
        return self.correct / denom if denom else 0.0


def _members(pred: CommunityPrediction | Collection[str]) -> frozenset[str]:
    if isinstance(pred, CommunityPrediction):
        return pred.community
    return frozenset(pred)


def _check_gold(gold_c1: Collection[str], gold_c2: Collection[str]) -> tuple[frozenset, frozenset]:
    c1, c2 = frozenset(gold_c1), frozenset(gold_c2)
    if len(c1) != COMMUNITY_SIZE or len(c2) != COMMUNITY_SIZE or c1 & c2:
        raise ValueError(
            f"gold communities must be disjoint sets of {COMMUNITY_SIZE}, got {sorted(c1)} / {sorted(c2)}"
        )
    return c1, c2


def _breakdown(pred: frozenset, gold: frozenset, name: str) -> CoverageBreakdown:
    correct = len(pred & gold)
    incorrect = len(pred - gold)
    missing = len(gold - pred)
    denom = correct + incorrect + missing
    return CoverageBreakdown(name, correct, incorrect, missing, correct / denom if denom else 0.0)


def coverage(
    pred: CommunityPrediction | Collection[str],
    gold_c1: Collection[str],
    gold_c2: Collection[str],
) -> CoverageBreakdown:
    """Score a predicted community against the gold community it overlaps most.

    Ties in overlap go to the match with the higher coverage, then to c1.
    """
    c1, c2 = _check_gold(gold_c1, gold_c2)
    members = _members(pred)
    b1 = _breakdown(members, c1, "c1")
    b2 = _breakdown(members, c2, "c2")
    if b2.correct > b1.correct or (b2.correct == b1.correct and b2.coverage > b1.coverage):
        return b2
    return b1


def dual_coverage(pred: CommunityPrediction, gold_c1: Collection[str], gold_c2: Collection[str]) -> float:
    """Mean coverage of the predicted community and the remainder, matched independently."""
    return 0.5 * (
        coverage(pred.community, gold_c1, gold_c2).coverage
        + coverage(pred.remainder, gold_c1, gold_c2).coverage
    )


def aggregate_coverage(values: Sequence[float]) -> float:
    """Mean of per-sample coverage values as a percentage, rounded to 2 decimals."""
    if len(values) == 0:
        raise ValueError("cannot aggregate an empty list of coverage values")
    return round(float(np.mean(np.asarray(values, dtype=float))) * 100.0, 2)


def dataset_coverage(
    preds: Sequence[CommunityPrediction | Collection[str]],
    golds: Sequence[tuple[Collection[str], Collection[str]]],
) -> float:
    if len(preds) != len(golds):
        raise ValueError(f"{len(preds)} predictions for {len(golds)} gold samples")
    return aggregate_coverage([coverage(p, g1, g2).coverage for p, (g1, g2) in zip(preds, golds)])


FACTUALITY_CLASSES = ("high", "mixed", "low")
BIAS_CLASSES = ("left", "center", "right")


def accuracy_macro_f1(
    pred_labels: Sequence[str],
    gold_labels: Sequence[str],
    classes: Iterable[str] = FACTUALITY_CLASSES,
) -> tuple[float, float]:
    """Accuracy and unweighted macro-F1 over a fixed class list.

    Classes with no gold and no predicted instances score F1 = 0.
    """
    classes = tuple(classes)
    if len(pred_labels) != len(gold_labels):
        raise ValueError("label lists differ in length")
    if not gold_labels:
        raise ValueError("no labels")
    known = set(classes)
    for lab in (*pred_labels, *gold_labels):
        if lab not in known:
            raise ValueError(f"unknown label {lab!r}; expected one of {classes}")
    pairs = list(zip(pred_labels, gold_labels))
    accuracy = sum(p == g for p, g in pairs) / len(pairs)
    f1s = []
    for c in classes:
        tp = sum(p == c and g == c for p, g in pairs)
        fp = sum(p == c and g != c for p, g in pairs)
        fn = sum(p != c and g == c for p, g in pairs)
        f1s.append(2 * tp / (2 * tp + fp + fn) if tp else 0.0)
    return accuracy, float(np.mean(f1s))
