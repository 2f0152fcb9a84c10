"""Tabular SMDP Q-learning over (region, task state) with options as actions."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any

import numpy as np
from loguru import logger

from .config import ManagerConfig
from .envs.gridworld import Inventory
from .errors import PersistenceError
from .errors import UsageError
from .options import OptionKind
from .options import OptionOutcome
from .options import OptionSpec
from .options import TaskChange
from .region_graph import WorkerFactory
from .utils import PathLike
from .utils import save_csv

ManagerState = tuple[int, Inventory]

Q_TABLE_FIELDS = ["region", "task_state", "option", "value"]


class EpsilonSchedule:
    """Linear decay from `start` to `end` over `horizon` steps, constant afterwards."""

    def __init__(self, start: float, end: float, horizon: int) -> None:
        self.start = start
        self.end = end
        self.horizon = max(horizon, 1)

    def __call__(self, step: int) -> float:
        fraction = min(max(step, 0) / self.horizon, 1.0)
        return self.start + fraction * (self.end - self.start)


class ManagerQ:
    """Q((z, s), o), created lazily at 0 for the options admissible in z."""

    def __init__(self, config: ManagerConfig, rng: np.random.Generator) -> None:
        self.learning_rate = config.learning_rate
        self.gamma = config.gamma
        self.rng = rng
        self.q: dict[ManagerState, dict[str, float]] = {}

    def __len__(self) -> int:
        return sum(len(row) for row in self.q.values())

    def value(self, state: ManagerState, option_id: str) -> float:
        return self.q.get(state, {}).get(option_id, 0.0)

    @staticmethod
    def _check_admissible(state: ManagerState, options: Sequence[OptionSpec]) -> None:
        for option in options:
            if option.region != state[0]:
                raise UsageError(f"Option {option.option_id} is not admissible in region {state[0]}")

    def values(self, state: ManagerState, options: Sequence[OptionSpec]) -> np.ndarray:
        self._check_admissible(state, options)
        row = self.q.get(state, {})
        return np.asarray([row.get(option.option_id, 0.0) for option in options])

    def get_option(
        self,
        state: ManagerState,
        admissible: Sequence[OptionSpec],
        epsilon: float,
        rng: np.random.Generator | None = None,
    ) -> OptionSpec:
        if not admissible:
            raise UsageError(f"No admissible options at {state}")
        self._check_admissible(state, admissible)
        if all(option.kind is OptionKind.EXPLORE for option in admissible):
            return admissible[0]

        rng = self.rng if rng is None else rng
        if rng.random() < epsilon:
            return admissible[int(rng.integers(len(admissible)))]
        values = self.values(state, admissible)
        best = np.flatnonzero(values == values.max())
        return admissible[int(best[rng.integers(len(best))])] if len(best) > 1 else admissible[int(best[0])]

    def update_policy(
        self,
        state: ManagerState,
        option: OptionSpec,
        outcome: OptionOutcome,
        next_state: ManagerState,
        next_admissible: Sequence[OptionSpec],
        terminal: bool,
    ) -> float:
        """Q(x,o) += α (R_k + γ^k max_o' Q(x',o') - Q(x,o)); no bootstrap from terminal states.

        Returns the TD error.
        """
        origin = (outcome.start_region, outcome.start_state.inventory)
        if outcome.option is not option or origin != state:
            raise UsageError(
                f"Outcome of {outcome.option.option_id} from {origin} does not match {option.option_id} at {state}"
            )
        self._check_admissible(state, [option])

        bootstrap = 0.0
        if not terminal and next_admissible:
            bootstrap = float(self.values(next_state, next_admissible).max())
        row = self.q.setdefault(state, {})
        current = row.get(option.option_id, 0.0)
        td_error = outcome.task_reward + self.gamma**outcome.duration * bootstrap - current
        row[option.option_id] = current + self.learning_rate * td_error
        return td_error

    def reset(self) -> None:
        self.q = {}

    def rows(self) -> list[dict[str, Any]]:
        return [
            {"region": z, "task_state": int(s), "option": option_id, "value": value}
            for (z, s), row in sorted(self.q.items())
            for option_id, value in sorted(row.items())
        ]

    def dump_csv(self, f: PathLike) -> None:
        save_csv(self.rows(), f, Q_TABLE_FIELDS)

    def state_dict(self) -> dict[str, Any]:
        return {"learning_rate": self.learning_rate, "gamma": self.gamma, "q": self.rows()}

    def load_state_dict(self, state: dict[str, Any]) -> None:
        try:
            self.learning_rate = float(state["learning_rate"])
            self.gamma = float(state["gamma"])
            self.q = {}
            for row in state["q"]:
                key = (int(row["region"]), Inventory(int(row["task_state"])))
                self.q.setdefault(key, {})[str(row["option"])] = float(row["value"])
        except (KeyError, TypeError, ValueError) as e:
            raise PersistenceError(f"Corrupt manager state: {e}") from e


class TaskStateRegistry:
    """Discovered task states S_T and the task options o_z^{s,s'} observed in each region."""

    def __init__(self, make_worker: WorkerFactory, step_limit: int = 100, initial: Inventory = Inventory.NONE) -> None:
        self.make_worker = make_worker
        self.step_limit = step_limit
        self.initial = initial
        self.states: set[Inventory] = {initial}
        self.options: dict[tuple[int, Inventory, Inventory], OptionSpec] = {}

    def observe_task_change(self, region: int, state: Inventory, next_state: Inventory) -> tuple[bool, bool]:
        if state == next_state:
            raise UsageError(f"No task-state change in region {region}: {state}")
        new_state = next_state not in self.states
        self.states.add(next_state)
        key = (region, state, next_state)
        if key in self.options:
            return new_state, False
        change: TaskChange = (state, next_state)
        option = OptionSpec.task(region, change, self.step_limit)
        option.worker = self.make_worker(option)
        self.options[key] = option
        logger.debug(f"Discovered task option {option.option_id}")
        return new_state, True

    def options_for(self, region: int, state: Inventory) -> list[OptionSpec]:
        return [option for (z, s, _), option in sorted(self.options.items()) if z == region and s == state]

    def reset(self) -> None:
        self.states = {self.initial}
        self.options = {}

    def state_dict(self) -> dict[str, Any]:
        entries = []
        for (region, state, next_state), option in sorted(self.options.items()):
            assert option.worker is not None
            entries.append(
                {"region": region, "from": int(state), "to": int(next_state), "worker": option.worker.state_dict()}
            )
        return {"states": sorted(int(s) for s in self.states), "options": entries}

    def load_state_dict(self, state: dict[str, Any]) -> None:
        self.reset()
        try:
            self.states = {Inventory(int(s)) for s in state["states"]}
            for entry in state["options"]:
                region, before, after = int(entry["region"]), Inventory(int(entry["from"])), Inventory(int(entry["to"]))
                self.observe_task_change(region, before, after)
                worker = self.options[(region, before, after)].worker
                assert worker is not None
                worker.load_state_dict(entry["worker"])
        except (KeyError, TypeError, ValueError) as e:
            raise PersistenceError(f"Corrupt task registry state: {e}") from e


def admissible_options(
    region: int,
    task_state: Inventory,
    explore: OptionSpec,
    navigate: Sequence[OptionSpec],
    registry: TaskStateRegistry,
) -> list[OptionSpec]:
    """O_z for the manager: exploration, then navigate options of z, then task options of (z, s)."""
    return [explore, *navigate, *registry.options_for(region, task_state)]


def reset_for_transfer(manager: ManagerQ, registry: TaskStateRegistry) -> ManagerQ:
    """Forget everything task-specific; the region graph and its navigate options are kept."""
    manager.reset()
    registry.reset()
    logger.info("Reset manager and task options for a new task")
    return manager
