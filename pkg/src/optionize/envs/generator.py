from __future__ import annotations

from collections import deque
from dataclasses import replace

import numpy as np
from loguru import logger

from ..config import EnvConfig
from ..errors import GenerationError
from .gridworld import Action
from .gridworld import GridState
from .gridworld import GridWorld
from .gridworld import resolve_layout
from .layouts import Cell
from .layouts import Layout
from .layouts import builtin_layout


def doorway_cells(layout: Layout) -> set[Cell]:
    """Passable cells squeezed between two opposite walls."""
    cells = set()
    for x, y in layout.passable_cells():
        horizontal = layout.is_wall(x - 1, y) and layout.is_wall(x + 1, y)
        vertical = layout.is_wall(x, y - 1) and layout.is_wall(x, y + 1)
        if horizontal or vertical:
            cells.add((x, y))
    return cells


def room_map(layout: Layout) -> dict[Cell, int]:
    """Label every non-doorway passable cell with its room id (flood fill)."""
    doorways = doorway_cells(layout)
    rooms: dict[Cell, int] = {}
    next_id = 0
    for cell in layout.passable_cells():
        if cell in rooms or cell in doorways or cell in layout.fatal:
            continue
        queue = deque([cell])
        rooms[cell] = next_id
        while queue:
            x, y = queue.popleft()
            for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                neighbor = (nx, ny)
                if layout.is_wall(nx, ny) or neighbor in rooms or neighbor in doorways or neighbor in layout.fatal:
                    continue
                rooms[neighbor] = next_id
                queue.append(neighbor)
        next_id += 1
    return rooms


def doorway_rooms(layout: Layout) -> dict[Cell, tuple[int, ...]]:
    """Rooms joined by each doorway, sorted."""
    rooms = room_map(layout)
    joined = {}
    for x, y in doorway_cells(layout):
        adjacent = {rooms[c] for c in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)) if c in rooms}
        joined[(x, y)] = tuple(sorted(adjacent))
    return joined


def door_room(layout: Layout) -> int:
    """Room on the near side of the door: the door's room that does not hold the treasure."""
    if layout.door is None or layout.treasure is None:
        raise GenerationError(f"Layout {layout.name} has no door or treasure")
    rooms = room_map(layout)
    joined = doorway_rooms(layout).get(layout.door, ())
    near = [r for r in joined if r != rooms.get(layout.treasure)]
    if len(near) != 1:
        raise GenerationError(f"Door {layout.door} of {layout.name} does not gate the treasure room")
    return near[0]


def generate_task(base: str | EnvConfig, seed: int, mirrored: bool = False) -> EnvConfig:
    """Resample key, door and treasure on a base map.

    The treasure is placed in a room with a single doorway (other than the start room), the door in
    that doorway. For kdt1 the key shares the door's near room; for kdt2 it goes to a different room.
    """
    config = base if isinstance(base, EnvConfig) else EnvConfig(layout=base)
    base_name = config.base_layout if config.layout == "generated" else config.layout
    if base_name not in ("kdt1", "kdt2"):
        raise GenerationError(f"Cannot generate tasks on layout {base_name}")
    layout = builtin_layout(base_name)
    rng = np.random.default_rng(seed)

    rooms = room_map(layout)
    cells_by_room: dict[int, list[Cell]] = {}
    for cell, room in sorted(rooms.items(), key=lambda item: (item[0][1], item[0][0])):
        if cell != layout.start:
            cells_by_room.setdefault(room, []).append(cell)
    if sum(len(cells) for cells in cells_by_room.values()) < 3:
        raise GenerationError(f"Layout {base_name} has fewer than 3 candidate cells")

    joined = doorway_rooms(layout)
    doorways_of: dict[int, list[Cell]] = {}
    for cell, pair in sorted(joined.items()):
        for room in pair:
            doorways_of.setdefault(room, []).append(cell)

    start_room = rooms[layout.start]
    leaves = sorted(room for room, doors in doorways_of.items() if len(doors) == 1 and room != start_room)
    if not leaves:
        raise GenerationError(f"Layout {base_name} has no room with a single doorway to hold the treasure")

    treasure_room = leaves[int(rng.integers(len(leaves)))]
    if not cells_by_room.get(treasure_room):
        raise GenerationError(f"Treasure room {treasure_room} of {base_name} has no free cell")
    treasure_cells = cells_by_room[treasure_room]
    treasure = treasure_cells[int(rng.integers(len(treasure_cells)))]
    door = doorways_of[treasure_room][0]
    near_room = door_room(replace(layout, door=door, treasure=treasure))

    if base_name == "kdt1":
        key_rooms = [near_room]
    else:
        key_rooms = sorted(r for r in cells_by_room if r not in (near_room, treasure_room))
    key_rooms = [r for r in key_rooms if cells_by_room.get(r)]
    if not key_rooms:
        raise GenerationError(f"No admissible key room on {base_name}")

    key_room = key_rooms[int(rng.integers(len(key_rooms)))]
    key_cells = cells_by_room[key_room]
    key = key_cells[int(rng.integers(len(key_cells)))]

    task = config.model_copy(
        update={
            "layout": "generated",
            "base_layout": base_name,
            "start": layout.start,
            "key": key,
            "door": door,
            "treasure": treasure,
        }
    )
    if mirrored:
        task = mirror_task(task)
    if solve_bfs(GridWorld(task.model_copy(update={"action_noise": 0.0}))) is None:
        raise GenerationError(f"Generated task is not solvable: {task}")
    logger.debug(f"Generated task on {base_name} with seed {seed}: key={key} door={door} treasure={treasure}")
    return task


def mirror_task(config: EnvConfig) -> EnvConfig:
    """Reflect start and objects about the vertical midline."""
    layout = resolve_layout(config)
    if not layout.is_mirror_symmetric():
        raise GenerationError(f"Layout {layout.name} is not mirror-symmetric")

    def reflect(cell: Cell | None) -> Cell | None:
        return None if cell is None else (layout.width - 1 - cell[0], cell[1])

    return config.model_copy(
        update={
            "start": reflect(layout.start),
            "key": reflect(layout.key),
            "door": reflect(layout.door),
            "treasure": reflect(layout.treasure),
        }
    )


def solve_bfs(env: GridWorld, state: GridState | None = None) -> list[Action] | None:
    """Shortest action plan to the objective on the noise-free dynamics, or None."""
    start = state or env.reset()
    root = (start.x, start.y, start.inventory)
    parents: dict[tuple, tuple | None] = {root: None}
    actions: dict[tuple, Action] = {}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        if env.objective_reached(current):
            key = (current.x, current.y, current.inventory)
            plan = []
            while parents[key] is not None:
                plan.append(actions[key])
                key = parents[key]
            return plan[::-1]
        if not current.alive:
            continue
        for action in Action:
            successor, _ = env.move(current, action)
            key = (successor.x, successor.y, successor.inventory)
            if key in parents:
                continue
            parents[key] = (current.x, current.y, current.inventory)
            actions[key] = action
            queue.append(successor)
    return None
