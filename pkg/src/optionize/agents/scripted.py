from __future__ import annotations

import numpy as np

from ..envs.generator import solve_bfs
from ..envs.gridworld import GridWorld
from .base import AgentStats
from .base import EpisodeResult


class ScriptedAgent:
    """Follows a BFS plan to the objective and replans after every step, so action noise is absorbed."""

    def __init__(self, env: GridWorld, label: str = "SCRIPTED") -> None:
        self.env = env
        self.label = label
        self.steps = 0
        self.episodes = 0

    def train_until(self, target_steps: int) -> None:
        self.steps = max(self.steps, target_steps)

    def evaluate_episode(self, env: GridWorld, rng: np.random.Generator) -> EpisodeResult:
        state = env.start_state()
        total = 0.0
        while not env.is_terminal(state):
            plan = solve_bfs(env, state)
            if not plan:
                break
            transition = env.step(state, plan[0], rng=rng)
            total += transition.reward
            state = transition.next_state
        return EpisodeResult(
            episode_return=total,
            steps=state.t,
            success=env.objective_reached(state),
            died=not state.alive,
        )

    def reset_for_transfer(self) -> None:
        pass

    def set_env(self, env: GridWorld) -> None:
        self.env = env

    def stats(self) -> AgentStats:
        return AgentStats()
