import numpy as np
import pytest

from optionize.agents import HRLAgent
from optionize.agents import get_agent
from optionize.agents.hrl import EVENT_FIELDS
from optionize.compression import adjacent_region_pairs
from optionize.config import HRLAgentConfig
from optionize.config import OptionConfig
from optionize.config import RunConfig
from optionize.config import default_env_config
from optionize.envs import GridWorld
from optionize.errors import PersistenceError
from optionize.errors import UsageError
from optionize.harness import evaluate
from optionize.utils import load_csv
from optionize.workers import SILWorker
from optionize.workers.base import rng_state


def make_agent(
    layout: str = "kdt1",
    label: str = "HRL-TAB",
    seed: int = 0,
    config: RunConfig | None = None,
    **env_overrides,
) -> HRLAgent:
    env = GridWorld(default_env_config(layout, **env_overrides))
    agent = get_agent(label, env, config or RunConfig(agents=[label]), seed)
    assert isinstance(agent, HRLAgent)
    return agent


def test_discovered_edges_are_adjacent_regions() -> None:
    agent = make_agent(action_noise=0.0)
    agent.train_until(3000)

    assert 3000 <= agent.steps < 3000 + agent.env.budget
    assert len(agent.graph.regions) >= 2
    assert agent.graph.edges
    assert agent.graph.edges <= adjacent_region_pairs(agent.env.layout, agent.config.compression)
    assert agent.stats().regions == len(agent.graph.regions)


def test_evaluation_leaves_agent_untouched() -> None:
    agent = make_agent()
    agent.train_until(2000)
    fingerprint = agent.graph.fingerprint()
    rows = agent.manager.rows()
    registry = agent.registry.state_dict()
    steps, rng = agent.steps, rng_state(agent.rng)

    result = evaluate(agent, GridWorld(agent.env.config), 3, np.random.default_rng(0))
    assert 0.0 <= result.success_rate <= 1.0
    assert agent.graph.fingerprint() == fingerprint
    assert agent.manager.rows() == rows
    assert agent.registry.state_dict() == registry
    assert agent.steps == steps
    assert rng_state(agent.rng) == rng


def test_transfer_reset_keeps_graph() -> None:
    agent = make_agent()
    agent.train_until(2000)
    fingerprint = agent.graph.fingerprint()

    agent.set_env(GridWorld(default_env_config("kdt2")))
    agent.reset_for_transfer()
    assert agent.graph.fingerprint() == fingerprint
    assert len(agent.manager) == 0
    assert agent.registry.options == {}

    agent.train_until(agent.steps + 500)
    assert agent.graph.regions


def test_transfer_reset_mid_episode_raises() -> None:
    agent = make_agent(label="HRL-CO")
    agent.train_until(2000)
    if agent._state is None:
        agent._begin_episode()
    fingerprint = agent.graph.fingerprint()
    rows = agent.manager.rows()

    with pytest.raises(UsageError):
        agent.reset_for_transfer()
    assert agent.graph.fingerprint() == fingerprint
    assert agent.manager.rows() == rows
    assert agent._state is not None


def test_set_env_with_other_size_raises() -> None:
    agent = make_agent()
    with pytest.raises(UsageError):
        agent.set_env(GridWorld(default_env_config("hazard")))


def test_same_seed_same_agent() -> None:
    first, second = make_agent(seed=3), make_agent(seed=3)
    first.train_until(1500)
    second.train_until(1500)
    assert first.graph.fingerprint() == second.graph.fingerprint()
    assert first.manager.rows() == second.manager.rows()
    assert first.steps == second.steps


def test_snapshot_round_trip(tmp_path) -> None:
    agent = make_agent()
    agent.train_until(1500)
    agent.save(tmp_path)
    assert (tmp_path / "graph.json").exists()

    loaded = HRLAgent.load(tmp_path, GridWorld(agent.env.config), agent.config)
    assert loaded.graph == agent.graph
    assert loaded.manager.rows() == agent.manager.rows()
    assert set(loaded.registry.options) == set(agent.registry.options)
    assert loaded.steps == agent.steps

    env = GridWorld(agent.env.config)
    assert evaluate(loaded, env, 3, np.random.default_rng(5)) == evaluate(agent, env, 3, np.random.default_rng(5))


def test_missing_snapshot_raises(tmp_path) -> None:
    with pytest.raises(PersistenceError):
        HRLAgent.load(tmp_path, GridWorld(default_env_config("kdt1")), HRLAgentConfig())


def test_controllability_agent_on_hazard() -> None:
    agent = make_agent(layout="hazard", label="HRL-CO")
    assert agent.tracker is not None
    assert agent.config.compression.cell_width == 5
    agent.train_until(3000)
    stats = agent.stats()
    assert stats.deaths_per_transition >= 0.0
    assert 0.0 <= stats.edge_success_mean <= 1.0


def test_sil_workers() -> None:
    agent = make_agent(label="HRL-SIL")
    agent.train_until(300)
    assert all(isinstance(option.worker, SILWorker) for option in agent.graph.navigate_options.values())


def test_relabel_and_event_log(tmp_path) -> None:
    config = RunConfig(agents=["HRL-TAB"], log_events=True, hrl=HRLAgentConfig(option=OptionConfig(relabel=True)))
    agent = make_agent(config=config)
    agent.train_until(1000)
    assert agent.events

    agent.dump_events(tmp_path / "events.csv")
    rows = load_csv(tmp_path / "events.csv")
    assert list(rows[0]) == EVENT_FIELDS
    assert len(rows) == len(agent.events)


def test_untrained_agent_fails_sparse_task() -> None:
    agent = make_agent(layout="kdt2", reward_mode="terminal-only")
    result = evaluate(agent, GridWorld(agent.env.config), 10, np.random.default_rng(0))
    assert result.success_rate <= 0.1
