"""The reward curriculum and the PPO update on a four-armed bandit.

Run: python3 demos/04_curriculum_and_ppo.py
"""

from focusarea.trainer import CandidatePolicy, CurriculumState, PPOTrainer, RLConfig, curriculum_step

# %% A reward joins the active set after three validations without improvement.
state = CurriculumState()
for score in [0.40, 0.41, 0.41, 0.41, 0.41, 0.30, 0.35, 0.35, 0.35, 0.35]:
    state = curriculum_step(state, score, patience=3)
    print(f"val={score:.2f} active={'+'.join(state.active_rewards):<12} stall={state.stall_counter}")

# %% PPO with a KL anchor to the starting policy, on a bandit where arm d pays 1.0.
rewards = {"arm a": 0.2, "arm b": 0.2, "arm c": 0.2, "arm d": 1.0}
policy = CandidatePolicy(list(rewards))
trainer = PPOTrainer(policy, policy.frozen_copy(), RLConfig(lr=0.05, batch_size=16))
for step in range(15):
    stats = trainer.step([""] * 16, lambda _inputs, outputs: [rewards[o] for o in outputs])
    probs = policy.probs("").tolist()
    print(f"step {step:2d} updates={stats.n_updates:3d} reward={stats.mean_reward:.3f} "
          f"kl={stats.kl_from_ref:.3f} p(d)={probs[policy.index['arm d']]:.3f}")
