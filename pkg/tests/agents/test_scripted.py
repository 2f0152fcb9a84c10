import numpy as np

from optionize.agents import ScriptedAgent
from optionize.config import default_env_config
from optionize.envs import GridWorld
from optionize.envs import generate_task
from optionize.harness import evaluate


def test_scripted_agent_solves_kdt1() -> None:
    env = GridWorld(default_env_config("kdt1"))
    result = evaluate(ScriptedAgent(env), env, 20, np.random.default_rng(0))
    assert result.success_rate == 1.0
    assert result.mean_return == 3.0


def test_scripted_agent_solves_generated_task() -> None:
    env = GridWorld(generate_task("kdt2", 1))
    result = evaluate(ScriptedAgent(env), env, 5, np.random.default_rng(0))
    assert result.success_rate == 1.0
