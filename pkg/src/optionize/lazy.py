import numpy as np

from .agents.base import Agent
from .agents.factory import get_agent
from .config import RewardMode
from .config import RunConfig
from .config import default_env_config
from .envs.gridworld import GridWorld
from .harness import EvalResult
from .harness import evaluate


def _create_agent(
    layout: str = "kdt1",
    agent: str = "HRL-TAB",
    reward_mode: RewardMode = "all-objects",
    seed: int = 0,
    config: RunConfig | None = None,
) -> tuple[Agent, GridWorld]:
    config = config or RunConfig(agents=[agent])
    env = GridWorld(default_env_config(layout, reward_mode=reward_mode))
    return get_agent(agent, env, config, seed), env


def lazy_run(
    steps: int,
    layout: str = "kdt1",
    agent: str = "HRL-TAB",
    reward_mode: RewardMode = "all-objects",
    seed: int = 0,
    episodes: int = 20,
    config: RunConfig | None = None,
) -> tuple[Agent, EvalResult]:
    """Train an agent on a built-in layout for a number of steps, then evaluate it.

    Args:
        steps (int): Training budget in primitive env steps.
        layout (str): Built-in layout id.
        agent (str): Agent label, e.g. HRL-TAB or SIL-EXP.
        reward_mode (RewardMode): all-objects or terminal-only.
        seed (int): Seed of the agent and of the evaluation episodes.
        episodes (int): Number of evaluation episodes.
        config (RunConfig | None): Run config holding the agent settings.
    """
    trained, env = _create_agent(layout=layout, agent=agent, reward_mode=reward_mode, seed=seed, config=config)
    trained.train_until(steps)
    return trained, evaluate(trained, env, episodes, np.random.default_rng([seed, 2]))
