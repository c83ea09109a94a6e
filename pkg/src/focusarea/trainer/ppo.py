"""KL-regularized PPO over whole generated focus areas, and the curriculum RL loop.

Each generated focus area is one episode; its reward arrives at the end.
The per-sample return is the task reward minus ``kl_coef`` times the
sampled log-ratio against the frozen reference, centered by the batch
mean. The clipped surrogate is applied per token with that return
broadcast over the sequence. ``kl_coef`` adapts toward ``target_kl``.
A gradient step that pushes the KL from the reference past ``target_kl``
is undone and ends the update epochs for that batch.
"""

from __future__ import annotations

import copy
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np
import torch

from ..gateway import BackendError, detect_community
from ..metrics import coverage
from ..rewards import (
    InformativenessScorer,
    combine_rewards,
    discriminative_entities,
    rf1,
    rf2,
    rf4,
    rouge_reward,
)
from ..rewards.entities import EntityExtractor
from ..types import FocusArea, FocusSource, RewardVector, SampleSextet
from .config import RLConfig, TrainConfig
from .curriculum import CurriculumState, curriculum_step
from .policy import PolicyModel
from .supervised import policy_input

log = logging.getLogger(__name__)

# Rewards for a batch of generated outputs; ``None`` marks a sample to skip.
RewardFn = Callable[[Sequence[str], Sequence[str]], Sequence[float | None]]


@dataclass
class PPOStats:
    mean_reward: float
    kl_from_ref: float
    sampled_kl: float
    entropy: float
    kl_coef: float
    epochs_run: int
    early_stopped: bool
    n_updates: int
    diverged: bool = False


class PPOTrainer:
    def __init__(self, policy: PolicyModel, reference: PolicyModel, cfg: RLConfig | None = None):
        self.policy = policy
        self.reference = reference
        self.cfg = cfg or RLConfig()
        self.lr = self.cfg.lr
        self.kl_coef = self.cfg.init_kl_coef
        self.generator = torch.Generator().manual_seed(self.cfg.seed)
        self.opt = torch.optim.Adam(policy.parameters(), lr=self.lr)
        self.n_updates = 0
        self._checkpoint = self._snapshot()

    def _snapshot(self):
        return self.policy.snapshot(), copy.deepcopy(self.opt.state_dict())

    def _restore(self, snap) -> None:
        self.policy.restore(snap[0])
        self.opt.load_state_dict(copy.deepcopy(snap[1]))

    def mark_checkpoint(self) -> None:
        self._checkpoint = self._snapshot()

    def _set_lr(self, lr: float) -> None:
        self.lr = lr
        for group in self.opt.param_groups:
            group["lr"] = lr

    def measured_kl(self, inputs: Sequence[str], outputs: Sequence[str]) -> float:
        with torch.no_grad():
            return float(self.policy.kl_divergence(self.reference, inputs, outputs).mean())

    def step(self, inputs: Sequence[str], reward_fn: RewardFn) -> PPOStats | None:
        """One rollout plus up to ``ppo_epochs`` gradient steps. ``None`` if every sample was skipped."""
        cfg = self.cfg
        outputs = self.policy.sample(inputs, self.generator)
        rewards = list(reward_fn(inputs, outputs))
        keep = [i for i, r in enumerate(rewards) if r is not None]
        if not keep:
            return None
        inputs = [inputs[i] for i in keep]
        outputs = [outputs[i] for i in keep]
        task = torch.tensor([float(rewards[i]) for i in keep])

        with torch.no_grad():
            old_lp, mask = self.policy.token_logprob_tensor(inputs, outputs)
            ref_lp, _ = self.reference.token_logprob_tensor(inputs, outputs)
        sampled_kl = (old_lp - ref_lp).sum(-1)
        if float(sampled_kl.mean()) > cfg.divergence_factor * cfg.target_kl:
            log.warning("KL %.3f exceeds %gx target; restoring checkpoint and halving lr",
                        float(sampled_kl.mean()), cfg.divergence_factor)
            self._restore(self._checkpoint)
            self._set_lr(self.lr / 2)
            return PPOStats(float(task.mean()), self.measured_kl(inputs, outputs), float(sampled_kl.mean()),
                            0.0, self.kl_coef, 0, True, self.n_updates, diverged=True)

        returns = task - self.kl_coef * sampled_kl
        adv = returns - returns.mean()
        if cfg.normalize_advantages and len(adv) > 1:
            adv = adv / (adv.std() + 1e-8)
        adv_tok = adv.unsqueeze(-1) * mask
        n_tok = mask.sum().clamp(min=1)

        epochs_run, stopped, ent_val = 0, False, 0.0
        for _ in range(cfg.ppo_epochs):
            before = self._snapshot()
            new_lp, _ = self.policy.token_logprob_tensor(inputs, outputs)
            ratio = torch.exp(new_lp - old_lp) * mask
            clipped = torch.clamp(ratio, 1 - cfg.clip_ratio, 1 + cfg.clip_ratio)
            surrogate = (torch.min(ratio * adv_tok, clipped * adv_tok)).sum() / n_tok
            entropy = self.policy.entropy(inputs, outputs).mean()
            loss = -(surrogate + cfg.entropy_coef * entropy)
            self.opt.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(self.policy.parameters(), cfg.max_grad_norm)
            self.opt.step()
            self.n_updates += 1
            ent_val = float(entropy.detach())
            if self.measured_kl(inputs, outputs) > cfg.target_kl:
                self._restore(before)
                self.n_updates -= 1
                stopped = True
                break
            epochs_run += 1

        kl_now = self.measured_kl(inputs, outputs)
        err = float(np.clip(kl_now / cfg.target_kl - 1.0, -0.2, 0.2))
        self.kl_coef *= 1.0 + err * len(inputs) / cfg.kl_horizon
        return PPOStats(float(task.mean()), kl_now, float(sampled_kl.mean()), ent_val,
                        self.kl_coef, epochs_run, stopped, self.n_updates)


class FocusRewarder:
    """Scores a generated focus area for one training sample.

    Detection calls and discriminative-entity sets are memoized per sample.
    """

    def __init__(
        self,
        backend,
        ner: EntityExtractor,
        scorer: InformativenessScorer | None = None,
        rouge_weight: float = 0.25,
        **complete_kwargs,
    ):
        self.backend = backend
        self.ner = ner
        self.scorer = scorer
        self.rouge_weight = rouge_weight
        self.complete_kwargs = complete_kwargs
        self._des: dict[tuple, frozenset] = {}
        self._preds: dict[tuple, object] = {}

    def prediction(self, sample: SampleSextet, text: str):
        key = (sample.sample_id, sample.presentation_order, text)
        if key not in self._preds:
            focus = FocusArea(text, FocusSource.RL_MODEL) if text.strip() else FocusArea.none()
            self._preds[key] = detect_community(sample, focus, self.backend, **self.complete_kwargs)
        return self._preds[key]

    def entities(self, sample: SampleSextet) -> frozenset:
        key = (sample.sample_id, sample.presentation_order)
        if key not in self._des:
            c1 = [sample.user(u).summary or "" for u in sorted(sample.gold_c1)]
            c2 = [sample.user(u).summary or "" for u in sorted(sample.gold_c2)]
            self._des[key] = discriminative_entities(c1, c2, self.ner).entities
        return self._des[key]

    def __call__(self, sample: SampleSextet, text: str, active: Sequence[str]) -> RewardVector:
        parts: dict[str, float | None] = {}
        if "rf1" in active:
            parts["rf1_coverage"] = rf1(self.prediction(sample, text), sample.gold_c1, sample.gold_c2)
        if "rf2" in active:
            parts["rf2_entity"] = rf2(text, self.entities(sample))
        if "rf3" in active:
            if self.scorer is None:
                raise ValueError("rf3 is active but no informativeness scorer was given")
            parts["rf3_informativeness"] = self.scorer.score(text)
        if "rf4" in active:
            parts["rf4_length"] = rf4(text)
        if sample.gold_focus_area:
            parts["rouge"] = rouge_reward(text, sample.gold_focus_area)
        combined = combine_rewards(parts, active, self.rouge_weight)
        return RewardVector(**parts, combined=min(1.0, max(0.0, combined)))


class RLOutcome(NamedTuple):
    policy: PolicyModel
    curriculum: CurriculumState
    history: list[dict]


METRIC_FIELDS = ("iteration", "phase", "active", "val_score", "val_coverage", "train_reward", "kl", "kl_coef", "lr")


def evaluate_policy(
    policy: PolicyModel,
    samples: Sequence[SampleSextet],
    rewarder: FocusRewarder,
    active: Sequence[str],
    max_prompt_len: int = 650,
) -> tuple[float, float]:
    """Mean combined reward and mean detection coverage with greedy focus areas."""
    rewards, covs = [], []
    for s in samples:
        text = policy.generate(policy_input(s, max_prompt_len))
        try:
            rewards.append(rewarder(s, text, active).combined)
            covs.append(coverage(rewarder.prediction(s, text), s.gold_c1, s.gold_c2).coverage)
        except BackendError as exc:
            log.warning("validation sample %s skipped: %s", s.sample_id, exc)
    if not rewards:
        raise BackendError("every validation sample failed")
    return float(np.mean(rewards)), float(np.mean(covs))


def train_rl(
    policy: PolicyModel,
    reference: PolicyModel,
    backend,
    train: Sequence[SampleSextet],
    val: Sequence[SampleSextet],
    cfg: TrainConfig | None = None,
    *,
    ner: EntityExtractor,
    scorer: InformativenessScorer | None = None,
    curriculum: CurriculumState | None = None,
    checkpoint_dir: str | Path | None = None,
) -> RLOutcome:
    """Curriculum PPO: rollouts against the task LLM, one validation per iteration."""
    cfg = cfg or TrainConfig()
    rl = cfg.rl
    state = curriculum or CurriculumState()
    rewarder = FocusRewarder(backend, ner, scorer, cfg.rouge_weight)
    trainer = PPOTrainer(policy, reference, rl)
    rng = np.random.default_rng(rl.seed)
    max_len = cfg.sl.max_prompt_len
    inputs_by_id = {s.sample_id: policy_input(s, max_len) for s in train}
    history: list[dict] = []
    ckpt = Path(checkpoint_dir) if checkpoint_dir is not None else None
    if ckpt is not None:
        ckpt.mkdir(parents=True, exist_ok=True)
        with (ckpt / "metrics.csv").open("w", newline="") as fh:
            csv.writer(fh).writerow(METRIC_FIELDS)

    for it in range(rl.iterations):
        train_rewards, kls = [], []
        for _ in range(rl.steps_per_iteration):
            idx = rng.choice(len(train), size=min(rl.batch_size, len(train)), replace=False)
            batch = [train[int(i)] for i in idx]
            active = state.active_rewards

            def reward_fn(_inputs, outputs, batch=batch, active=active):
                out = []
                for s, text in zip(batch, outputs):
                    try:
                        out.append(rewarder(s, text, active).combined)
                    except BackendError as exc:
                        log.warning("sample %s skipped: %s", s.sample_id, exc)
                        out.append(None)
                return out

            stats = trainer.step([inputs_by_id[s.sample_id] for s in batch], reward_fn)
            if stats is not None:
                train_rewards.append(stats.mean_reward)
                kls.append(stats.kl_from_ref)
        val_score, val_cov = evaluate_policy(policy, val, rewarder, state.active_rewards, max_len)
        row = {
            "iteration": it,
            "phase": state.phase,
            "active": "+".join(state.active_rewards),
            "val_score": round(val_score, 6),
            "val_coverage": round(val_cov, 6),
            "train_reward": round(float(np.mean(train_rewards)), 6) if train_rewards else math.nan,
            "kl": round(float(np.mean(kls)), 6) if kls else math.nan,
            "kl_coef": round(trainer.kl_coef, 6),
            "lr": trainer.lr,
        }
        history.append(row)
        log.info("iteration %d: %s", it, row)
        state = curriculum_step(state, val_score, cfg.patience)
        trainer.mark_checkpoint()
        if ckpt is not None:
            step_dir = ckpt / f"step_{it:06d}"
            policy.save(step_dir)
            state.save(step_dir / "curriculum.json")
            with (ckpt / "metrics.csv").open("a", newline="") as fh:
                csv.DictWriter(fh, METRIC_FIELDS).writerow(row)
    if ckpt is not None:
        policy.save(ckpt / "final")
        state.save(ckpt / "final" / "curriculum.json")
    return RLOutcome(policy, state, history)
