"""Validation-stall curriculum over the reward functions."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

REWARD_ORDER = ("rf1", "rf2", "rf3", "rf4")


@dataclass(frozen=True)
class CurriculumState:
    phase: int = 0
    active_rewards: tuple[str, ...] = ("rf1",)
    stall_counter: int = 0
    best_val: float = -math.inf
    val_history: tuple[tuple[int, float], ...] = ()
    # ablations fix the active set and never advance
    pinned: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "active_rewards", tuple(self.active_rewards))
        object.__setattr__(self, "val_history", tuple(tuple(x) for x in self.val_history))
        if not self.active_rewards:
            raise ValueError("active_rewards must be nonempty")
        if not self.pinned and self.active_rewards != REWARD_ORDER[: len(self.active_rewards)]:
            raise ValueError(f"active_rewards {self.active_rewards} is not a prefix of {REWARD_ORDER}")
        if self.pinned and not set(self.active_rewards) <= set(REWARD_ORDER):
            raise ValueError(f"unknown rewards in {self.active_rewards}")

    @classmethod
    def pinned_to(cls, *rewards: str) -> "CurriculumState":
        return cls(active_rewards=tuple(rewards), pinned=True)

    def to_json(self) -> dict:
        d = asdict(self)
        d["best_val"] = None if math.isinf(self.best_val) else self.best_val
        d["active_rewards"] = list(self.active_rewards)
        d["val_history"] = [list(x) for x in self.val_history]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "CurriculumState":
        d = dict(d)
        if d.get("best_val") is None:
            d["best_val"] = -math.inf
        return cls(**d)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))


def curriculum_step(state: CurriculumState, val_score: float, patience: float = 3) -> CurriculumState:
    """Record one validation evaluation and activate the next reward on stall.

    The stall counter saturates at ``patience`` once every reward is active.
    """
    history = state.val_history + ((len(state.val_history), float(val_score)),)
    if val_score > state.best_val:
        return replace(state, best_val=float(val_score), stall_counter=0, val_history=history)
    stall = state.stall_counter + 1
    if stall >= patience and not state.pinned and len(state.active_rewards) < len(REWARD_ORDER):
        nxt = REWARD_ORDER[len(state.active_rewards)]
        return replace(
            state,
            phase=state.phase + 1,
            active_rewards=state.active_rewards + (nxt,),
            stall_counter=0,
            best_val=-math.inf,
            val_history=history,
        )
    if not math.isinf(patience):
        stall = min(stall, int(patience))
    return replace(state, stall_counter=stall, val_history=history)
