"""Non-hierarchical SIL baseline over the full task MDP, optionally with a count-based bonus."""

from __future__ import annotations

import math

import numpy as np
from loguru import logger

from ..config import FlatAgentConfig
from ..envs.gridworld import GridState
from ..envs.gridworld import GridWorld
from ..envs.gridworld import Transition
from ..errors import UsageError
from ..workers.base import ObservationEncoder
from ..workers.base import WorkerStep
from ..workers.sil import SILWorker
from .base import AgentStats
from .base import EpisodeResult
from .base import episode_seed

CountKey = tuple[int, int, int]


def count_key(state: GridState) -> CountKey:
    return (state.x, state.y, int(state.inventory))


def exploration_bonus(state: GridState, counts: dict[CountKey, int], beta: float) -> float:
    """Visit `state`, then return beta / sqrt(N(state))."""
    key = count_key(state)
    counts[key] = counts.get(key, 0) + 1
    return beta / math.sqrt(counts[key])


class FlatAgent:
    def __init__(
        self,
        env: GridWorld,
        config: FlatAgentConfig,
        seed: int = 0,
        label: str = "SIL",
    ) -> None:
        self.env = env
        self.config = config
        self.seed = seed
        self.label = label
        self.use_bonus = label.removeprefix("NO-TRANSFER-") == "SIL-EXP"
        encoder = ObservationEncoder(env.width, env.height, include_inventory=True)
        self.worker = SILWorker(config.sil, encoder, np.random.default_rng([seed, 0]))
        self.episode_rng = np.random.default_rng([seed, 1])
        self.counts: dict[CountKey, int] = {}

        self.steps = 0
        self.episodes = 0
        self._state: GridState | None = None

    def exploration_bonus(self, state: GridState) -> float:
        return exploration_bonus(state, self.counts, self.config.bonus_beta)

    def set_env(self, env: GridWorld) -> None:
        self._finish_episode(completed=False)
        self.env = env

    def reset_for_transfer(self) -> None:
        if self._state is not None:
            raise UsageError("reset_for_transfer called mid-episode, call set_env first")
        self.worker.clear_replay()
        logger.info(f"Cleared the {self.label} replay buffer for a new task")

    def _finish_episode(self, completed: bool = True) -> None:
        if self._state is None:
            return
        self.worker.end_episode()
        if completed:
            self.episodes += 1
        self._state = None

    def train_until(self, target_steps: int) -> None:
        while self.steps < target_steps:
            if self._state is None:
                self._state = self.env.reset(seed=episode_seed(self.episode_rng))
            self._train_step()

    def _train_step(self) -> Transition:
        assert self._state is not None
        state = self._state
        action = self.worker.act(state)
        transition = self.env.step(state, action)
        next_state = transition.next_state
        reward = transition.reward
        if self.use_bonus:
            reward += self.exploration_bonus(next_state)
        self.steps += 1

        absorbing = transition.terminal and not self.env.is_truncated(next_state)
        self.worker.observe(WorkerStep(state, action, reward, None if absorbing else next_state))
        self._state = next_state
        if transition.terminal:
            self._finish_episode()
        return transition

    def run_flat_episode(self) -> EpisodeResult:
        """Train on one full episode from reset. The reported return counts task reward only."""
        self._finish_episode(completed=False)
        self._state = self.env.reset(seed=episode_seed(self.episode_rng))
        total = 0.0
        while True:
            transition = self._train_step()
            total += transition.reward
            if transition.terminal:
                final = transition.next_state
                return EpisodeResult(
                    episode_return=total,
                    steps=final.t,
                    success=self.env.objective_reached(final),
                    died=not final.alive,
                )

    def evaluate_episode(self, env: GridWorld, rng: np.random.Generator) -> EpisodeResult:
        state = env.start_state()
        total = 0.0
        while not env.is_terminal(state):
            transition = env.step(state, self.worker.act(state, greedy=True, rng=rng), rng=rng)
            total += transition.reward
            state = transition.next_state
        return EpisodeResult(
            episode_return=total,
            steps=state.t,
            success=env.objective_reached(state),
            died=not state.alive,
        )

    def stats(self) -> AgentStats:
        return AgentStats()
