"""Maximum-likelihood training of the policy on gold focus areas."""

from __future__ import annotations

import logging
import random
from typing import Sequence

import torch

from ..types import SampleSextet
from .config import SLConfig
from .policy import PolicyModel, truncate_words

log = logging.getLogger(__name__)


def policy_input(sample: SampleSextet, max_prompt_len: int = 650) -> str:
    """Summaries in presentation order, as the generator sees them."""
    parts = []
    for i, user in enumerate(sample.ordered_users(), 1):
        if not user.summary:
            raise ValueError(f"sample {sample.sample_id!r}: user {user.user_id!r} has no summary")
        parts.append(f"user_{i}: {user.summary}")
    return " ".join(truncate_words(" ".join(parts), max_prompt_len))


def supervised_pairs(samples: Sequence[SampleSextet], max_prompt_len: int = 650) -> list[tuple[str, str]]:
    """(input, gold focus) pairs; samples without a gold focus area are skipped with a warning."""
    pairs = []
    for s in samples:
        if not s.gold_focus_area:
            log.warning("sample %s has no gold focus area, skipped", s.sample_id)
            continue
        pairs.append((policy_input(s, max_prompt_len), " ".join(s.gold_focus_area.split())))
    return pairs


def mean_nll(policy: PolicyModel, pairs: Sequence[tuple[str, str]]) -> float:
    with torch.no_grad():
        lp = policy.sequence_logprobs([x for x, _ in pairs], [y for _, y in pairs])
    return float(-lp.mean())


def train_supervised(
    policy: PolicyModel,
    pairs: Sequence[tuple[str, str]],
    cfg: SLConfig | None = None,
    *,
    val_pairs: Sequence[tuple[str, str]] | None = None,
    history: list[dict] | None = None,
) -> PolicyModel:
    """Fit ``policy`` to maximize log p(gold focus | summaries).

    The parameters with the lowest validation NLL (training NLL when no
    validation set is given) are restored at the end. Per-epoch losses are
    appended to ``history`` when provided.
    """
    cfg = cfg or SLConfig()
    pairs = [(x, y) for x, y in pairs if y and y.strip()]
    if not pairs:
        raise ValueError("no training pairs with a gold focus area")
    val_pairs = list(val_pairs) if val_pairs else pairs
    torch.manual_seed(cfg.seed)
    rng = random.Random(cfg.seed)
    opt = torch.optim.AdamW(policy.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)
    best = (mean_nll(policy, val_pairs), policy.snapshot())
    order = list(range(len(pairs)))
    for epoch in range(cfg.epochs):
        policy.train()
        rng.shuffle(order)
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = [pairs[i] for i in order[start:start + cfg.batch_size]]
            loss = -policy.sequence_logprobs([x for x, _ in batch], [y for _, y in batch]).mean()
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item() * len(batch)
        policy.eval()
        val = mean_nll(policy, val_pairs)
        if history is not None:
            history.append({"epoch": epoch, "train_nll": total / len(pairs), "val_nll": val})
        log.debug("epoch %d train %.4f val %.4f", epoch, total / len(pairs), val)
        if val < best[0]:
            best = (val, policy.snapshot())
    policy.restore(best[1])
    return policy
