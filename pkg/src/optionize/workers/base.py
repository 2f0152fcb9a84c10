from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any
from typing import Protocol

import numpy as np

from ..envs.gridworld import GridState
from ..envs.gridworld import Inventory

INVENTORY_FLAGS = (Inventory.KEY, Inventory.DOOR, Inventory.TREASURE)


@dataclass(frozen=True, slots=True)
class WorkerStep:
    """One option-MDP transition (s, a, r̄, s').

    `next_state` is None when the step entered a terminal super-state: the worker only learns that
    the option ended, not which destination cell it reached.
    """

    state: GridState
    action: int
    reward: float
    next_state: GridState | None

    @property
    def terminal(self) -> bool:
        return self.next_state is None


class Worker(Protocol):
    kind: str

    def act(self, state: GridState, greedy: bool = False, rng: np.random.Generator | None = None) -> int: ...

    def observe(self, step: WorkerStep) -> None: ...

    def end_episode(self) -> Any: ...

    def apply_bonus(self, ticket: Any, bonus: float) -> None: ...

    def learn_offline(self, steps: Sequence[WorkerStep]) -> None: ...

    def state_dict(self) -> dict[str, Any]: ...

    def load_state_dict(self, state: dict[str, Any]) -> None: ...


@dataclass(frozen=True)
class ObservationEncoder:
    """Position scaled to [0,1]^2, optionally followed by the inventory flags."""

    width: int
    height: int
    include_inventory: bool = False

    @property
    def dim(self) -> int:
        return 2 + (len(INVENTORY_FLAGS) if self.include_inventory else 0)

    def __call__(self, state: GridState) -> np.ndarray:
        obs = [state.x / max(self.width - 1, 1), state.y / max(self.height - 1, 1)]
        if self.include_inventory:
            obs.extend(float(flag in state.inventory) for flag in INVENTORY_FLAGS)
        return np.asarray(obs, dtype=np.float64)


def rng_state(rng: np.random.Generator) -> dict[str, Any]:
    return rng.bit_generator.state


def restore_rng(state: dict[str, Any]) -> np.random.Generator:
    rng = np.random.default_rng()
    rng.bit_generator.state = state
    return rng
