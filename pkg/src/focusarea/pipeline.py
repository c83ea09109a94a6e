"""Dataset-level glue: summarize, generate gold focus areas, detect, evaluate."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .gateway import BackendError, detect_community, generate_gold_focus_area, summarize_sample
from .metrics import aggregate_coverage, coverage, dual_coverage
from .trainer.policy import PolicyModel
from .trainer.supervised import policy_input
from .types import FocusArea, FocusSource, SampleSextet

log = logging.getLogger(__name__)

EVAL_FIELDS = (
    "sample_id",
    "focus_source",
    "focus_area",
    "community",
    "remainder",
    "matched_gold",
    "correct",
    "incorrect",
    "missing",
    "coverage",
    "dual_coverage",
    "parse_warning",
)

FocusProvider = Callable[[SampleSextet], FocusArea]


def summarize_dataset(samples: Sequence[SampleSextet], backend, *, seed: int = 0, **kw) -> list[SampleSextet]:
    """Summaries for every user; samples whose calls fail are dropped with a warning."""
    out = []
    for s in samples:
        try:
            out.append(summarize_sample(s, backend, seed=seed, **kw))
        except BackendError as exc:
            log.warning("sample %s dropped: %s", s.sample_id, exc)
    return out


def add_gold_focus(samples: Sequence[SampleSextet], backend, *, ordering_filter: str = "strip", **kw) -> list[SampleSextet]:
    out = []
    for s in samples:
        try:
            fa = generate_gold_focus_area(s, backend, ordering_filter=ordering_filter, **kw)
        except BackendError as exc:
            log.warning("no gold focus area for %s: %s", s.sample_id, exc)
            out.append(s)
            continue
        out.append(s.replace(gold_focus_area=fa.text))
    return out


def no_focus(_: SampleSextet) -> FocusArea:
    return FocusArea.none()


def gold_focus(sample: SampleSextet) -> FocusArea:
    if not sample.gold_focus_area:
        return FocusArea.none()
    return FocusArea(sample.gold_focus_area, FocusSource.GOLD_LLM)


def policy_focus(policy: PolicyModel, source: FocusSource = FocusSource.RL_MODEL, max_prompt_len: int = 650) -> FocusProvider:
    def provide(sample: SampleSextet) -> FocusArea:
        text = policy.generate(policy_input(sample, max_prompt_len))
        return FocusArea(text, source) if text.strip() else FocusArea.none()

    return provide


@dataclass
class EvalResult:
    rows: list[dict]
    summary: dict


def evaluate(samples: Sequence[SampleSextet], backend, focus: FocusProvider = no_focus, **kw) -> EvalResult:
    """Detect communities for each sample and score them against gold."""
    rows, skipped = [], []
    for s in samples:
        fa = focus(s)
        try:
            pred = detect_community(s, fa, backend, **kw)
        except BackendError as exc:
            log.warning("sample %s skipped: %s", s.sample_id, exc)
            skipped.append(s.sample_id)
            continue
        cb = coverage(pred, s.gold_c1, s.gold_c2)
        rows.append(
            {
                "sample_id": s.sample_id,
                "focus_source": fa.source.value,
                "focus_area": fa.text,
                "community": " ".join(sorted(pred.community)),
                "remainder": " ".join(sorted(pred.remainder)),
                "matched_gold": cb.matched_gold,
                "correct": cb.correct,
                "incorrect": cb.incorrect,
                "missing": cb.missing,
                "coverage": round(cb.coverage, 6),
                "dual_coverage": round(dual_coverage(pred, s.gold_c1, s.gold_c2), 6),
                "parse_warning": int(pred.parse_warning),
            }
        )
    if not rows:
        raise BackendError("no sample could be evaluated")
    summary = {
        "n_samples": len(rows),
        "skipped": skipped,
        "dataset_coverage": aggregate_coverage([r["coverage"] for r in rows]),
        "dataset_dual_coverage": aggregate_coverage([r["dual_coverage"] for r in rows]),
        "parse_warnings": sum(r["parse_warning"] for r in rows),
    }
    return EvalResult(rows, summary)


def write_eval(result: EvalResult, out_dir: str | Path, extra: dict | None = None) -> tuple[Path, Path]:
    """Per-sample ``eval_samples.csv`` and aggregate ``eval_summary.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out_dir / "eval_samples.csv", out_dir / "eval_summary.json"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, EVAL_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(result.rows)
    summary = {**result.summary, **(extra or {})}
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return csv_path, json_path


def run_fixture_pipeline(out_dir: str | Path, seed: int = 0, n_pairs: int = 20) -> dict:
    """Synthetic dump → sextets → scripted summaries → detection → metrics files."""
    from .synthetic import fixture_dataset, scripted_backend
    from .types import serialize_dataset

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    backend = scripted_backend()
    samples = fixture_dataset(n_pairs, seed)
    serialize_dataset(samples, out_dir / "dataset.jsonl")
    samples = summarize_dataset(samples, backend, seed=seed)
    serialize_dataset(samples, out_dir / "summarized.jsonl")
    samples = add_gold_focus(samples, backend)
    result = evaluate(samples, backend, gold_focus)
    write_eval(result, out_dir, {"seed": seed})
    return result.summary


def run_ordering_fixture(seed: int = 0, rl_iterations: int = 20) -> dict[str, float]:
    """Dataset coverage on held-out synthetic sextets for three focus sources.

    The supervised policy chooses among gold focus areas and their
    informative rewrites; RL then tunes it against the scripted detector.
    Learning rates are raised for this tiny categorical policy.
    """
    from .rewards import build_informativeness_corpus, rf3_train
    from .synthetic import fixture_dataset, scripted_backend, world_ner
    from .trainer import RLConfig, SLConfig, TrainConfig, make_policy, supervised_pairs, train_rl, train_supervised

    backend = scripted_backend()

    def prep(n: int, data_seed: int, split: str) -> list[SampleSextet]:
        samples = summarize_dataset(fixture_dataset(n, data_seed, split), backend, seed=data_seed)
        return add_gold_focus(samples, backend)

    train, val, test = prep(24, 1, "train"), prep(6, 2, "val"), prep(12, 3, "test")
    golds = sorted({s.gold_focus_area for s in train if s.gold_focus_area})
    corpus = build_informativeness_corpus(golds, backend)
    candidates = golds + [text for text, label in corpus if label == 1]
    cfg = TrainConfig(
        sl=SLConfig(lr=0.05, epochs=1, seed=seed),
        rl=RLConfig(lr=0.05, entropy_coef=0.01, iterations=rl_iterations, seed=seed),
    )
    pairs = supervised_pairs(train)
    policy = make_policy("candidate", pairs, candidates, cfg.sl)
    train_supervised(policy, pairs, cfg.sl)
    sl_policy = policy.frozen_copy()
    out = {
        "no_focus": evaluate(test, backend, no_focus).summary["dataset_coverage"],
        "supervised": evaluate(test, backend, policy_focus(sl_policy, FocusSource.SUPERVISED_MODEL)).summary[
            "dataset_coverage"
        ],
    }
    train_rl(policy, sl_policy, backend, train, val, cfg, ner=world_ner(), scorer=rf3_train(corpus, seed=seed))
    out["rl"] = evaluate(test, backend, policy_focus(policy)).summary["dataset_coverage"]
    return out


def run_purity_fixture(seed: int = 0, n_samples: int = 20, n_users: int = 60, k: int = 17) -> dict[str, float]:
    """Purity before and after injecting oracle communities into a planted-partition graph.

    Sextets are sampled by proximity in the raw feature space and split by
    the planted classes; embeddings are features smoothed over user edges.
    """
    import random

    from .graph import (
        cluster_purity,
        inject_community_edges,
        propagate_user_labels,
        sample_sextet_by_proximity,
        smoothed_user_embeddings,
    )
    from .synthetic import oracle_communities, planted_partition_graph

    graph, features, classes = planted_partition_graph(n_users, seed)
    labels = propagate_user_labels(graph)
    before = cluster_purity(smoothed_user_embeddings(graph, features), labels, k=k, seed=seed)
    rng = random.Random(seed)
    added = 0
    for _ in range(n_samples):
        sextet = sample_sextet_by_proximity(graph, features, rng)
        added += inject_community_edges(graph, oracle_communities(sextet, classes))
    after = cluster_purity(smoothed_user_embeddings(graph, features), labels, k=k, seed=seed)
    return {"before": before, "after": after, "edges_added": added}
