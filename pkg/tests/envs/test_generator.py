from dataclasses import replace

import pytest

from optionize.config import EnvConfig
from optionize.envs import GridWorld
from optionize.envs import builtin_layout
from optionize.envs import door_room
from optionize.envs import doorway_cells
from optionize.envs import generate_task
from optionize.envs import mirror_task
from optionize.envs import resolve_layout
from optionize.envs import room_map
from optionize.envs import solve_bfs
from optionize.envs.generator import doorway_rooms
from optionize.errors import GenerationError


def test_doorways_of_base_map() -> None:
    assert doorway_cells(builtin_layout("kdt1")) == {(9, 4), (4, 9), (14, 9)}


def test_rooms_of_base_map() -> None:
    rooms = room_map(builtin_layout("kdt1"))
    assert len(set(rooms.values())) == 4
    assert rooms[(2, 2)] == 0
    assert rooms[(10, 1)] == 1
    assert rooms[(4, 14)] == 2
    assert rooms[(14, 14)] == 3


def test_bfs_plan_on_kdt1() -> None:
    env = GridWorld(EnvConfig(layout="kdt1", action_noise=0.0))
    plan = solve_bfs(env)
    assert plan is not None
    assert len(plan) == 18

    state = env.reset()
    for action in plan:
        state = env.step(state, action).next_state
    assert env.objective_reached(state)


@pytest.mark.parametrize("base", ["kdt1", "kdt2"])
@pytest.mark.parametrize("seed", range(10))
def test_generated_task_constraints(base: str, seed: int) -> None:
    task = generate_task(base, seed)
    assert task.layout == "generated"
    assert task.base_layout == base

    layout = resolve_layout(task)
    rooms = room_map(layout)
    joined = doorway_rooms(layout)
    assert layout.door in joined

    treasure_room = rooms[layout.treasure]
    assert treasure_room != rooms[layout.start]
    treasure_doorways = [cell for cell, pair in joined.items() if treasure_room in pair]
    assert treasure_doorways == [layout.door]

    near_room = door_room(layout)
    assert set(joined[layout.door]) == {near_room, treasure_room}
    if base == "kdt1":
        assert rooms[layout.key] == near_room
    else:
        assert rooms[layout.key] not in (near_room, treasure_room)

    assert solve_bfs(GridWorld(task.model_copy(update={"action_noise": 0.0}))) is not None


def test_generation_is_deterministic() -> None:
    assert generate_task("kdt1", 7) == generate_task("kdt1", 7)


def test_mirror_reflects_objects() -> None:
    task = generate_task("kdt1", 3)
    mirrored = mirror_task(task)
    assert mirrored.key == (18 - task.key[0], task.key[1])
    assert mirrored.door == (18 - task.door[0], task.door[1])
    assert mirrored.treasure == (18 - task.treasure[0], task.treasure[1])
    assert mirror_task(mirrored) == task
    assert solve_bfs(GridWorld(mirrored.model_copy(update={"action_noise": 0.0}))) is not None


def test_mirrored_generation() -> None:
    assert generate_task("kdt2", 4, mirrored=True) == mirror_task(generate_task("kdt2", 4))


def test_hazard_cannot_be_generated() -> None:
    with pytest.raises(GenerationError):
        generate_task("hazard", 0)


def test_hazard_cannot_be_mirrored() -> None:
    with pytest.raises(GenerationError):
        mirror_task(EnvConfig(layout="hazard", objective="key"))


def test_door_room_of_builtin_maps() -> None:
    assert door_room(builtin_layout("kdt1")) == 0
    assert door_room(builtin_layout("kdt2")) == 1


def test_door_room_errors() -> None:
    with pytest.raises(GenerationError):
        door_room(builtin_layout("hazard"))
    # the top doorway joins two rooms, neither of which holds the treasure
    ungated = replace(builtin_layout("kdt1"), door=(9, 4), treasure=(14, 14))
    with pytest.raises(GenerationError):
        door_room(ungated)
