from __future__ import annotations

import pytest

from focusarea.types import Platform, SampleSextet, Split, UserRecord

IDS = ("a1", "a2", "a3", "b1", "b2", "b3")


def make_sample(
    sample_id: str = "s0",
    ids=IDS,
    summaries=None,
    order=None,
    gold_focus: str | None = None,
    split: Split = Split.TEST,
) -> SampleSextet:
    users = tuple(
        UserRecord(uid, Platform.REDDIT, (f"comment by {uid}",), {}, summaries[i] if summaries else None)
        for i, uid in enumerate(ids)
    )
    return SampleSextet(
        sample_id=sample_id,
        users=users,
        gold_c1=frozenset(ids[:3]),
        gold_c2=frozenset(ids[3:]),
        presentation_order=tuple(order or ids),
        split=split,
        gold_focus_area=gold_focus,
    )


@pytest.fixture
def sample() -> SampleSextet:
    return make_sample()


# RL toy fixtures shared by trainer and acceptance tests

BANDIT_REWARDS = {"arm a": 0.2, "arm b": 0.2, "arm c": 0.2, "arm d": 1.0}


def expected_reward(policy, rewards=BANDIT_REWARDS):
    probs = policy.probs("")
    return float(sum(float(probs[policy.index[c]]) * r for c, r in rewards.items()))


def total_variation(p, q):
    return 0.5 * float((p - q).abs().sum())


def run_bandit(max_updates=500, lr=0.05, seed=0):
    """Returns (policy, updates used) once expected reward reaches 0.9."""
    from focusarea.trainer import CandidatePolicy, PPOTrainer, RLConfig

    policy = CandidatePolicy(list(BANDIT_REWARDS))
    trainer = PPOTrainer(policy, policy.frozen_copy(), RLConfig(lr=lr, batch_size=16, seed=seed))
    reward_fn = lambda _inputs, outputs: [BANDIT_REWARDS[o] for o in outputs]  # noqa: E731
    while trainer.n_updates < max_updates and expected_reward(policy) < 0.9:
        trainer.step([""] * 16, reward_fn)
    return policy, trainer.n_updates


def run_uniform_reward(updates=200, seed=0, policy=None, reference=None, **cfg):
    from focusarea.trainer import CandidatePolicy, PPOTrainer, RLConfig

    policy = policy or CandidatePolicy(list(BANDIT_REWARDS))
    reference = reference or policy.frozen_copy()
    trainer = PPOTrainer(policy, reference, RLConfig(lr=0.05, batch_size=16, seed=seed, **cfg))
    while trainer.n_updates < updates:
        before = trainer.n_updates
        trainer.step([""] * 16, lambda _i, outputs: [0.5] * len(outputs))
        if trainer.n_updates == before:
            break
    return total_variation(policy.probs(""), reference.probs(""))


TOY_PAIRS = [
    ("user_1: The user mentions the dam project and Mayor Quill", "Focus on the dam project and Mayor Quill ."),
    ("user_1: The user mentions rail fares and Governor Hale", "Focus on rail fares versus Governor Hale ."),
]


def run_toy_supervised(epochs=120, lr=1e-2, seed=0):
    from focusarea.trainer import SLConfig, Seq2SeqPolicy, mean_nll, train_supervised

    policy = Seq2SeqPolicy.build(TOY_PAIRS, seed=seed)
    initial = mean_nll(policy, TOY_PAIRS)
    train_supervised(policy, TOY_PAIRS, SLConfig(lr=lr, epochs=epochs, batch_size=2, seed=seed))
    return policy, initial, mean_nll(policy, TOY_PAIRS)


# acceptance report

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        name, ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{n:2d}] {name}: {detail}")
