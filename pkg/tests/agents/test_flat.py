import numpy as np
import pytest

from optionize.agents import AgentStats
from optionize.agents import FlatAgent
from optionize.agents import exploration_bonus
from optionize.config import FlatAgentConfig
from optionize.config import default_env_config
from optionize.envs import GridState
from optionize.envs import GridWorld
from optionize.errors import UsageError


def make_agent(label: str = "SIL", seed: int = 0, budget: int = 300, **overrides) -> FlatAgent:
    env = GridWorld(default_env_config("kdt1", budget=budget))
    return FlatAgent(env, FlatAgentConfig(**overrides), seed=seed, label=label)


def test_count_bonus() -> None:
    counts: dict = {}
    state = GridState(2, 2)
    assert exploration_bonus(state, counts, 0.2) == pytest.approx(0.2)
    bonuses = [exploration_bonus(state, counts, 0.2) for _ in range(3)]
    assert bonuses[-1] == pytest.approx(0.1)
    assert bonuses == sorted(bonuses, reverse=True)


def test_bonus_only_for_exp_variant() -> None:
    plain, bonus = make_agent("SIL"), make_agent("SIL-EXP")
    plain.train_until(100)
    bonus.train_until(100)
    assert plain.counts == {}
    assert sum(bonus.counts.values()) == 100


def test_zero_beta_matches_plain_sil() -> None:
    plain = make_agent("SIL", budget=50, bonus_beta=0.0)
    bonus = make_agent("SIL-EXP", budget=50, bonus_beta=0.0)
    plain.train_until(200)
    bonus.train_until(200)
    for name, value in plain.worker.policy_params.items():
        np.testing.assert_array_equal(bonus.worker.policy_params[name], value)


def test_episode_return_counts_task_reward_only() -> None:
    agent = make_agent("SIL-EXP", budget=20)
    result = agent.run_flat_episode()
    assert result.steps <= 20
    assert float(result.episode_return).is_integer()
    assert agent.episodes == 1


def test_transfer_reset_clears_replay() -> None:
    agent = make_agent(budget=20)
    agent.train_until(50)
    assert len(agent.worker.replay) > 0
    with pytest.raises(UsageError):
        agent.reset_for_transfer()
    agent.set_env(GridWorld(default_env_config("kdt2", budget=20)))
    agent.reset_for_transfer()
    assert len(agent.worker.replay) == 0


def test_evaluation_leaves_policy_untouched() -> None:
    agent = make_agent(budget=30)
    agent.train_until(60)
    before = {name: value.copy() for name, value in agent.worker.policy_params.items()}
    result = agent.evaluate_episode(GridWorld(default_env_config("kdt1", budget=30)), np.random.default_rng(0))
    assert result.steps <= 30
    for name, value in before.items():
        np.testing.assert_array_equal(agent.worker.policy_params[name], value)
    assert agent.steps == 60


def test_stats_have_no_hierarchy_columns() -> None:
    agent = make_agent(budget=20)
    agent.train_until(60)
    assert agent.stats() == AgentStats()
    assert agent.episodes >= 3
