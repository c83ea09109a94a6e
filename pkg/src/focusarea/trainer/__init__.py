"""Supervised and curriculum-RL training of the focus-area generator."""

from .config import RLConfig, SLConfig, TrainConfig
from .curriculum import REWARD_ORDER, CurriculumState, curriculum_step
from .policy import CandidatePolicy, PolicyModel, Seq2SeqPolicy, load_policy, make_policy
from .ppo import FocusRewarder, PPOStats, PPOTrainer, RLOutcome, evaluate_policy, train_rl
from .supervised import mean_nll, policy_input, supervised_pairs, train_supervised

__all__ = [
    "CandidatePolicy",
    "CurriculumState",
    "FocusRewarder",
    "PPOStats",
    "PPOTrainer",
    "PolicyModel",
    "REWARD_ORDER",
    "RLConfig",
    "RLOutcome",
    "SLConfig",
    "Seq2SeqPolicy",
    "TrainConfig",
    "curriculum_step",
    "evaluate_policy",
    "load_policy",
    "make_policy",
    "mean_nll",
    "policy_input",
    "supervised_pairs",
    "train_rl",
    "train_supervised",
]
