from __future__ import annotations

from dataclasses import dataclass
from dataclasses import replace
from enum import IntEnum
from enum import IntFlag

import numpy as np
from loguru import logger

from ..config import EnvConfig
from ..errors import ConfigurationError
from ..errors import UsageError
from .layouts import Cell
from .layouts import Layout
from .layouts import builtin_layout
from .layouts import load_layout


class Action(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3


MOVES: dict[Action, tuple[int, int]] = {
    Action.UP: (0, -1),
    Action.DOWN: (0, 1),
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
}
N_ACTIONS = len(Action)


class Inventory(IntFlag):
    NONE = 0
    KEY = 1
    DOOR = 2
    TREASURE = 4


OBJECTIVE_FLAGS: dict[str, Inventory] = {
    "key": Inventory.KEY,
    "door": Inventory.DOOR,
    "treasure": Inventory.TREASURE,
}


@dataclass(frozen=True, slots=True)
class GridState:
    x: int
    y: int
    inventory: Inventory = Inventory.NONE
    alive: bool = True
    t: int = 0

    @property
    def position(self) -> Cell:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class Transition:
    state: GridState
    action: int
    reward: float
    next_state: GridState
    terminal: bool
    executed_action: int
    """Action actually applied after action noise."""


def resolve_layout(config: EnvConfig) -> Layout:
    """Map the config onto a concrete layout with the configured object positions."""
    if config.layout_path is not None:
        layout = load_layout(config.layout_path)
    elif config.layout == "generated":
        if config.base_layout is None:
            raise ConfigurationError("A generated layout needs base_layout")
        layout = builtin_layout(config.base_layout)
    else:
        layout = builtin_layout(config.layout)

    layout = replace(
        layout,
        start=config.start or layout.start,
        key=config.key or layout.key,
        door=config.door or layout.door,
        treasure=config.treasure or layout.treasure,
    )
    for name in ("start", "key", "door", "treasure"):
        cell = getattr(layout, name)
        if cell is None:
            continue
        if layout.is_wall(*cell) or cell in layout.fatal:
            raise ConfigurationError(f"{name} at {cell} is not on a passable cell of {layout.name}")
    objects = [c for c in (layout.key, layout.door, layout.treasure) if c is not None]
    if len(set(objects)) != len(objects) or layout.start in objects:
        raise ConfigurationError(f"Objects of {layout.name} overlap: start={layout.start}, objects={objects}")
    if OBJECTIVE_FLAGS[config.objective] is Inventory.KEY and layout.key is None:
        raise ConfigurationError(f"Objective key needs a key on {layout.name}")
    if OBJECTIVE_FLAGS[config.objective] is Inventory.DOOR and (layout.key is None or layout.door is None):
        raise ConfigurationError(f"Objective door needs a key and a door on {layout.name}")
    if OBJECTIVE_FLAGS[config.objective] is Inventory.TREASURE and None in (layout.key, layout.door, layout.treasure):
        raise ConfigurationError(f"Objective treasure needs key, door and treasure on {layout.name}")
    return layout


class GridWorld:
    """Key-door-treasure style gridworld with optional fatal cells.

    Object interaction is automatic on cell entry: the key is picked up, the door opens when the
    key is held (a closed door blocks movement otherwise) and the treasure is collected once the
    door is open.
    """

    def __init__(self, config: EnvConfig, layout: Layout | None = None) -> None:
        self.config = config
        self.layout = layout or resolve_layout(config)
        self.objective = OBJECTIVE_FLAGS[config.objective]
        self.rng = np.random.default_rng(config.seed)

    @property
    def width(self) -> int:
        return self.layout.width

    @property
    def height(self) -> int:
        return self.layout.height

    @property
    def budget(self) -> int:
        return self.config.budget

    def start_state(self) -> GridState:
        x, y = self.layout.start
        return GridState(x=x, y=y)

    def reset(self, seed: int | None = None) -> GridState:
        self.rng = np.random.default_rng(self.config.seed if seed is None else seed)
        return self.start_state()

    def objective_reached(self, state: GridState) -> bool:
        return self.objective in state.inventory

    def is_terminal(self, state: GridState) -> bool:
        return not state.alive or self.objective_reached(state) or state.t >= self.budget

    def is_truncated(self, state: GridState) -> bool:
        """Ended by the step budget only."""
        return state.alive and not self.objective_reached(state) and state.t >= self.budget

    def blocked(self, x: int, y: int, inventory: Inventory) -> bool:
        if self.layout.is_wall(x, y):
            return True
        door_closed = Inventory.DOOR not in inventory and Inventory.KEY not in inventory
        return (x, y) == self.layout.door and door_closed

    def move(self, state: GridState, action: int) -> tuple[GridState, list[Inventory]]:
        """Noise-free dynamics. Returns the successor and the object events it triggered."""
        dx, dy = MOVES[Action(action)]
        nx, ny = state.x + dx, state.y + dy
        if self.blocked(nx, ny, state.inventory):
            nx, ny = state.x, state.y

        inventory = state.inventory
        events: list[Inventory] = []
        cell = (nx, ny)
        if cell == self.layout.key and Inventory.KEY not in inventory:
            events.append(Inventory.KEY)
        elif cell == self.layout.door and Inventory.KEY in inventory and Inventory.DOOR not in inventory:
            events.append(Inventory.DOOR)
        elif cell == self.layout.treasure and Inventory.DOOR in inventory and Inventory.TREASURE not in inventory:
            events.append(Inventory.TREASURE)
        for event in events:
            inventory |= event

        alive = state.alive and cell not in self.layout.fatal
        return GridState(x=nx, y=ny, inventory=inventory, alive=alive, t=state.t + 1), events

    def reward(self, events: list[Inventory]) -> float:
        if self.config.reward_mode == "all-objects":
            return float(len(events))
        return 1.0 if self.objective in events else 0.0

    def step(self, state: GridState, action: int, rng: np.random.Generator | None = None) -> Transition:
        if self.is_terminal(state):
            raise UsageError(f"Cannot step terminal state {state}")
        rng = self.rng if rng is None else rng

        executed = int(action)
        if rng.random() < self.config.action_noise:
            executed = int(rng.integers(N_ACTIONS))

        next_state, events = self.move(state, executed)
        if not next_state.alive:
            logger.debug(f"Agent fell at {next_state.position} after {next_state.t} steps")
        return Transition(
            state=state,
            action=int(action),
            reward=self.reward(events),
            next_state=next_state,
            terminal=self.is_terminal(next_state),
            executed_action=executed,
        )
