import numpy as np
import pytest

from optionize.config import ManagerConfig
from optionize.config import TabularWorkerConfig
from optionize.envs import GridState
from optionize.envs import Inventory
from optionize.errors import PersistenceError
from optionize.errors import UsageError
from optionize.manager import EpsilonSchedule
from optionize.manager import ManagerQ
from optionize.manager import TaskStateRegistry
from optionize.manager import admissible_options
from optionize.manager import reset_for_transfer
from optionize.options import OptionOutcome
from optionize.options import OptionSpec
from optionize.options import TerminationCause
from optionize.workers import TabularWorker

NONE = Inventory.NONE


def make_manager(**overrides) -> ManagerQ:
    return ManagerQ(ManagerConfig(**overrides), np.random.default_rng(0))


def make_registry() -> TaskStateRegistry:
    return TaskStateRegistry(lambda option: TabularWorker(TabularWorkerConfig(), np.random.default_rng(0)))


def outcome_for(option: OptionSpec, duration: int, reward: float, inventory: Inventory = NONE) -> OptionOutcome:
    return OptionOutcome(
        option=option,
        start_state=GridState(1, 1, inventory),
        final_state=GridState(1, 1, inventory),
        cause=TerminationCause.REACHED_TARGET,
        duration=duration,
        task_reward=reward,
        option_reward=0.8,
    )


def test_explore_only_returns_explore() -> None:
    explore = OptionSpec.explore(0)
    assert make_manager().get_option((0, NONE), [explore], epsilon=0.0) is explore


def test_greedy_picks_argmax() -> None:
    manager = make_manager()
    explore, first, second = OptionSpec.explore(0), OptionSpec.navigate(0, 1, 100), OptionSpec.navigate(0, 5, 100)
    manager.q[(0, NONE)] = {first.option_id: 0.5, second.option_id: 0.1}
    for _ in range(20):
        assert manager.get_option((0, NONE), [explore, first, second], epsilon=0.0) is first


def test_epsilon_one_is_uniform() -> None:
    manager = make_manager()
    options = [OptionSpec.explore(0), OptionSpec.navigate(0, 1, 100), OptionSpec.navigate(0, 5, 100)]
    manager.q[(0, NONE)] = {options[1].option_id: 1.0}
    n = 30_000
    picks = [options.index(manager.get_option((0, NONE), options, epsilon=1.0)) for _ in range(n)]
    np.testing.assert_allclose(np.bincount(picks, minlength=3) / n, 1 / 3, atol=0.02)


def test_ties_break_uniformly() -> None:
    manager = make_manager()
    options = [OptionSpec.explore(0), OptionSpec.navigate(0, 1, 100), OptionSpec.navigate(0, 5, 100)]
    n = 30_000
    picks = [options.index(manager.get_option((0, NONE), options, epsilon=0.0)) for _ in range(n)]
    np.testing.assert_allclose(np.bincount(picks, minlength=3) / n, 1 / 3, atol=0.02)


def test_empty_or_inadmissible_raises() -> None:
    manager = make_manager()
    with pytest.raises(UsageError):
        manager.get_option((0, NONE), [], epsilon=0.0)
    with pytest.raises(UsageError):
        manager.get_option((0, NONE), [OptionSpec.explore(0), OptionSpec.navigate(1, 0, 100)], epsilon=0.0)


def test_values_do_not_create_entries() -> None:
    manager = make_manager()
    manager.values((0, NONE), [OptionSpec.explore(0)])
    assert len(manager) == 0


def test_single_step_terminal_update() -> None:
    manager = make_manager(learning_rate=1.0)
    option = OptionSpec.navigate(0, 1, 100)
    manager.update_policy((0, NONE), option, outcome_for(option, 1, 1.0), (1, NONE), [], terminal=True)
    assert manager.value((0, NONE), option.option_id) == pytest.approx(1.0)


def test_zero_reward_stays_zero() -> None:
    manager = make_manager()
    option = OptionSpec.navigate(0, 1, 100)
    manager.update_policy((0, NONE), option, outcome_for(option, 5, 0.0), (1, NONE), [], terminal=True)
    assert manager.value((0, NONE), option.option_id) == 0.0


def test_smdp_discount() -> None:
    manager = make_manager(learning_rate=1.0)
    option, onward = OptionSpec.navigate(0, 1, 100), OptionSpec.navigate(1, 2, 100)
    manager.q[(1, NONE)] = {onward.option_id: 2.0}
    outcome = outcome_for(option, 5, 0.99**4)
    manager.update_policy((0, NONE), option, outcome, (1, NONE), [onward], terminal=False)
    assert manager.value((0, NONE), option.option_id) == pytest.approx(0.99**4 + 0.99**5 * 2.0)


def test_terminal_does_not_bootstrap() -> None:
    manager = make_manager(learning_rate=1.0)
    option, onward = OptionSpec.navigate(0, 1, 100), OptionSpec.navigate(1, 2, 100)
    manager.q[(1, NONE)] = {onward.option_id: 2.0}
    manager.update_policy((0, NONE), option, outcome_for(option, 3, 0.5), (1, NONE), [onward], terminal=True)
    assert manager.value((0, NONE), option.option_id) == pytest.approx(0.5)


def test_mismatched_origin_raises() -> None:
    manager = make_manager()
    option = OptionSpec.navigate(0, 1, 100)
    with pytest.raises(UsageError):
        manager.update_policy((0, Inventory.KEY), option, outcome_for(option, 1, 0.0), (1, NONE), [], True)


def test_chain_matches_value_iteration() -> None:
    gamma = 0.99
    forward_01 = OptionSpec.navigate(0, 1, 100)
    forward_12 = OptionSpec.navigate(1, 2, 100)
    back_10 = OptionSpec.navigate(1, 0, 100)
    goal = OptionSpec.navigate(2, 3, 100)
    # option -> (duration, reward, next region, terminal)
    model = {
        forward_01: (3, 0.0, 1, False),
        forward_12: (4, 0.0, 2, False),
        back_10: (2, 0.0, 0, False),
        goal: (2, 1.0, 3, True),
    }
    admissible = {0: [forward_01], 1: [forward_12, back_10], 2: [goal], 3: []}

    q = {option: 0.0 for option in model}
    for _ in range(1000):
        for option, (k, r, z, terminal) in model.items():
            best = 0.0 if terminal else max(q[o] for o in admissible[z])
            q[option] = r + gamma**k * best

    manager = make_manager(learning_rate=1.0, gamma=gamma)
    for _ in range(1000):
        for option, (k, r, z, terminal) in model.items():
            outcome = outcome_for(option, k, r)
            manager.update_policy((option.region, NONE), option, outcome, (z, NONE), admissible[z], terminal)

    for option, expected in q.items():
        assert manager.value((option.region, NONE), option.option_id) == pytest.approx(expected, abs=1e-6)
    assert q[forward_12] == pytest.approx(gamma**4)


def test_dump_and_restore(tmp_path) -> None:
    manager = make_manager()
    manager.q[(0, NONE)] = {"nav:0->1": 0.25}
    manager.q[(3, Inventory.KEY)] = {"explore:3": -0.5}
    manager.dump_csv(tmp_path / "q.csv")
    lines = (tmp_path / "q.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "region,task_state,option,value"
    assert len(lines) == 3

    restored = make_manager()
    restored.load_state_dict(manager.state_dict())
    assert restored.rows() == manager.rows()


def test_corrupt_state_raises() -> None:
    with pytest.raises(PersistenceError):
        make_manager().load_state_dict({"q": []})


def test_registry_discovers_task_options() -> None:
    registry = make_registry()
    assert registry.observe_task_change(6, NONE, Inventory.KEY) == (True, True)
    assert registry.observe_task_change(6, NONE, Inventory.KEY) == (False, False)
    assert registry.observe_task_change(11, Inventory.KEY, Inventory.KEY | Inventory.DOOR) == (True, True)

    (option,) = registry.options_for(11, Inventory.KEY)
    assert option.option_id == "task:11:1->3"
    assert option.worker is not None
    assert registry.options_for(11, NONE) == []
    assert registry.states == {NONE, Inventory.KEY, Inventory.KEY | Inventory.DOOR}


def test_registry_without_change_raises() -> None:
    with pytest.raises(UsageError):
        make_registry().observe_task_change(6, Inventory.KEY, Inventory.KEY)


def test_registry_state_round_trip() -> None:
    registry = make_registry()
    registry.observe_task_change(6, NONE, Inventory.KEY)
    restored = make_registry()
    restored.load_state_dict(registry.state_dict())
    assert set(restored.options) == set(registry.options)
    assert restored.states == registry.states


def test_admissible_order() -> None:
    registry = make_registry()
    registry.observe_task_change(0, NONE, Inventory.KEY)
    explore, navigate = OptionSpec.explore(0), OptionSpec.navigate(0, 1, 100)
    options = admissible_options(0, NONE, explore, [navigate], registry)
    assert [option.option_id for option in options] == ["explore:0", "nav:0->1", "task:0:0->1"]


def test_reset_for_transfer_forgets_task_knowledge() -> None:
    manager, registry = make_manager(), make_registry()
    manager.q[(0, NONE)] = {"nav:0->1": 1.0}
    registry.observe_task_change(6, NONE, Inventory.KEY)
    reset_for_transfer(manager, registry)
    assert len(manager) == 0
    assert registry.options == {}
    assert registry.states == {NONE}


def test_epsilon_schedule() -> None:
    schedule = EpsilonSchedule(0.05, 0.005, 1000)
    assert schedule(0) == pytest.approx(0.05)
    assert schedule(500) == pytest.approx(0.0275)
    assert schedule(1000) == pytest.approx(0.005)
    assert schedule(5000) == pytest.approx(0.005)
