from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..envs.gridworld import GridWorld


@dataclass(frozen=True)
class EpisodeResult:
    episode_return: float
    """Task reward only; exploration bonuses never count."""

    steps: int
    success: bool
    died: bool = False


@dataclass(frozen=True)
class AgentStats:
    regions: int = 0
    options: int = 0
    edge_success_mean: float = 0.0
    deaths_per_transition: float = 0.0


class Agent(Protocol):
    label: str
    steps: int
    episodes: int

    def train_until(self, target_steps: int) -> None: ...

    def evaluate_episode(self, env: GridWorld, rng: np.random.Generator) -> EpisodeResult: ...

    def reset_for_transfer(self) -> None: ...

    def set_env(self, env: GridWorld) -> None: ...

    def stats(self) -> AgentStats: ...


def episode_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(2**32))
