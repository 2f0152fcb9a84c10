from __future__ import annotations

from collections.abc import Sequence
from typing import Any

import numpy as np

from ..config import TabularWorkerConfig
from ..envs.gridworld import N_ACTIONS
from ..envs.gridworld import GridState
from ..errors import PersistenceError
from .base import WorkerStep
from .base import restore_rng
from .base import rng_state

Key = tuple[int, int]


class TabularWorker:
    """Q-learning over the option MDP. States are cell positions inside the option's region.

    Terminal super-states never get a table entry, so their value is 0 by construction.
    """

    kind = "tabular"

    def __init__(self, config: TabularWorkerConfig, rng: np.random.Generator) -> None:
        self.learning_rate = config.learning_rate
        self.epsilon = config.epsilon
        self.gamma = config.gamma
        self.rng = rng
        self.q: dict[Key, np.ndarray] = {}
        self._last: tuple[Key, int] | None = None

    @staticmethod
    def key(state: GridState) -> Key:
        return (state.x, state.y)

    def values(self, state: GridState) -> np.ndarray:
        return self.q.get(self.key(state), np.zeros(N_ACTIONS))

    def act(self, state: GridState, greedy: bool = False, rng: np.random.Generator | None = None) -> int:
        rng = self.rng if rng is None else rng
        if not greedy and rng.random() < self.epsilon:
            return int(rng.integers(N_ACTIONS))
        values = self.values(state)
        best = np.flatnonzero(values == values.max())
        if len(best) == 1:
            return int(best[0])
        return int(best[rng.integers(len(best))])

    def update(self, step: WorkerStep) -> float:
        """Q(s,a) += α (r̄ + γ max_a' Q(s',a') - Q(s,a)), with no bootstrap from terminal super-states.

        Returns the TD error.
        """
        key = self.key(step.state)
        row = self.q.setdefault(key, np.zeros(N_ACTIONS))
        bootstrap = 0.0 if step.next_state is None else float(self.values(step.next_state).max())
        td_error = step.reward + self.gamma * bootstrap - row[step.action]
        row[step.action] += self.learning_rate * td_error
        return float(td_error)

    def observe(self, step: WorkerStep) -> None:
        self.update(step)
        self._last = (self.key(step.state), step.action)

    def end_episode(self) -> tuple[Key, int] | None:
        ticket, self._last = self._last, None
        return ticket

    def apply_bonus(self, ticket: tuple[Key, int] | None, bonus: float) -> None:
        # one-step correction of the final transition's value
        if ticket is None:
            return
        key, action = ticket
        self.q.setdefault(key, np.zeros(N_ACTIONS))[action] += self.learning_rate * bonus

    def learn_offline(self, steps: Sequence[WorkerStep]) -> None:
        for step in steps:
            self.update(step)

    def state_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "learning_rate": self.learning_rate,
            "epsilon": self.epsilon,
            "gamma": self.gamma,
            "q": [[x, y, row.tolist()] for (x, y), row in sorted(self.q.items())],
            "rng": rng_state(self.rng),
        }

    def load_state_dict(self, state: dict[str, Any]) -> None:
        if state.get("kind") != self.kind:
            raise PersistenceError(f"Expected a {self.kind} worker state, got {state.get('kind')!r}")
        try:
            self.learning_rate = float(state["learning_rate"])
            self.epsilon = float(state["epsilon"])
            self.gamma = float(state["gamma"])
            self.q = {(int(x), int(y)): np.asarray(row, dtype=np.float64) for x, y, row in state["q"]}
            self.rng = restore_rng(state["rng"])
        except (KeyError, TypeError, ValueError) as e:
            raise PersistenceError(f"Corrupt tabular worker state: {e}") from e
