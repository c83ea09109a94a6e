"""Logistic informativeness scorer for focus areas.

Training pairs come from the task LLM: each gold focus area is a negative
example and an LLM-rewritten, more detailed version of it is the positive.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.linear_model import LogisticRegression

from ..types import FocusArea
from .entities import EntityExtractor, capitalized_span_ner
from .rouge import tokenize

log = logging.getLogger(__name__)

FEATURE_SPEC_VERSION = "v1"
_WORD_COUNT = "__word_count__"
_ENTITY_COUNT = "__entity_count__"


def _ngram_features(text: str) -> set[str]:
    toks = tokenize(text)
    feats = {f"u:{t}" for t in toks}
    feats.update(f"b:{a} {b}" for a, b in zip(toks, toks[1:]))
    return feats


def extract_features(text: str, vocab: dict[str, int], ner: EntityExtractor = capitalized_span_ner) -> np.ndarray:
    """Feature vector: n-gram presence, log word count, distinct entity count."""
    x = np.zeros(len(vocab) + 2)
    for f in _ngram_features(text):
        idx = vocab.get(f)
        if idx is not None:
            x[idx] = 1.0
    x[-2] = math.log1p(len(text.split()))
    x[-1] = float(len(set(ner(text))))
    return x


@dataclass
class InformativenessScorer:
    vocab: dict[str, int]
    weights: np.ndarray
    intercept: float
    feature_spec_version: str = FEATURE_SPEC_VERSION
    ner: EntityExtractor = field(default=capitalized_span_ner, repr=False)

    def score(self, text: str) -> float:
        z = float(extract_features(text, self.vocab, self.ner) @ self.weights + self.intercept)
        # numerically stable logistic
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        ez = math.exp(z)
        return ez / (1.0 + ez)

    def to_json(self) -> dict:
        names = sorted(self.vocab, key=self.vocab.get) + [_WORD_COUNT, _ENTITY_COUNT]
        return {
            "feature_spec_version": self.feature_spec_version,
            "features": names,
            "weights": [float(w) for w in self.weights],
            "intercept": float(self.intercept),
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1, sort_keys=True))

    @classmethod
    def from_json(cls, d: dict) -> "InformativenessScorer":
        if d.get("feature_spec_version") != FEATURE_SPEC_VERSION:
            raise ValueError(f"unsupported feature spec {d.get('feature_spec_version')!r}")
        names = d["features"][:-2]
        return cls({n: i for i, n in enumerate(names)}, np.asarray(d["weights"], dtype=float), float(d["intercept"]))

    @classmethod
    def load(cls, path: str | Path) -> "InformativenessScorer":
        return cls.from_json(json.loads(Path(path).read_text()))


def rf3_train(
    corpus: Sequence[tuple[str, int]],
    *,
    C: float = 1.0,
    seed: int = 0,
    ner: EntityExtractor = capitalized_span_ner,
) -> InformativenessScorer:
    """Fit the scorer on ``(text, label)`` pairs, label 1 = informative."""
    labels = {int(y) for _, y in corpus}
    if labels != {0, 1}:
        raise ValueError(f"corpus needs both labels, found {sorted(labels)}")
    names = sorted(set().union(*(_ngram_features(t) for t, _ in corpus)))
    vocab = {n: i for i, n in enumerate(names)}
    X = np.stack([extract_features(t, vocab, ner) for t, _ in corpus])
    y = np.array([int(lab) for _, lab in corpus])
    model = LogisticRegression(C=C, max_iter=2000, random_state=seed)
    model.fit(X, y)
    return InformativenessScorer(vocab, model.coef_[0].copy(), float(model.intercept_[0]), ner=ner)


def rf3_score(scorer: InformativenessScorer, focus: FocusArea | str) -> float:
    text = focus.text if isinstance(focus, FocusArea) else focus
    return scorer.score(text)


def build_informativeness_corpus(gold_focus_areas: Sequence[FocusArea | str], backend, **complete_kwargs) -> list[tuple[str, int]]:
    """Label each gold text 0 and its LLM-augmented rewrite 1.

    Backend failures and rewrites identical to the input drop the pair.
    """
    from ..gateway import BackendError, complete, render_informative_prompt

    corpus: list[tuple[str, int]] = []
    for item in gold_focus_areas:
        text = item.text if isinstance(item, FocusArea) else item
        try:
            resp = complete(render_informative_prompt(text), backend, **complete_kwargs)
        except BackendError as exc:
            log.warning("skipping informativeness pair for %r: %s", text, exc)
            continue
        augmented = resp.text.strip()
        if not augmented or " ".join(augmented.split()) == " ".join(text.split()):
            log.warning("degenerate rewrite for %r, pair dropped", text)
            continue
        corpus.append((text, 0))
        corpus.append((augmented, 1))
    return corpus
