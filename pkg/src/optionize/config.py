from __future__ import annotations

import os
from functools import cache
from pathlib import Path
from typing import Any
from typing import Literal

import yaml
from loguru import logger
from pydantic import BaseModel
from pydantic import Field
from pydantic import ValidationError
from pydantic import model_validator

from .errors import ConfigurationError

RewardMode = Literal["all-objects", "terminal-only"]
Objective = Literal["key", "door", "treasure"]
WorkerKind = Literal["tabular", "sil"]
OptimizerName = Literal["sgd", "adam"]
ExperimentId = Literal["exploration-kdt1", "exploration-kdt2", "transfer", "controllability"]
Cell = tuple[int, int]

BUILTIN_LAYOUTS: tuple[str, ...] = ("kdt1", "kdt2", "hazard")
HRL_AGENTS: tuple[str, ...] = ("HRL-SIL", "HRL-TAB", "HRL", "HRL-CO")
FLAT_AGENTS: tuple[str, ...] = ("SIL", "SIL-EXP")
NO_TRANSFER_PREFIX = "NO-TRANSFER-"


class ConfigModel(BaseModel):
    """Base of every config model: invalid values raise ConfigurationError on construction."""

    def __init__(self, /, **data: Any) -> None:
        try:
            super().__init__(**data)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid {type(self).__name__}: {e}") from e


class EnvConfig(ConfigModel):
    layout: str = "kdt1"
    """Layout id: kdt1, kdt2, hazard, or generated (objects placed by the task generator)."""

    base_layout: str | None = None
    """Map the generated task was drawn from. Required when layout is generated."""

    layout_path: str | None = None
    """Optional ASCII map file; overrides the built-in map of `layout`."""

    action_noise: float = Field(default=0.2, ge=0.0, le=1.0)
    """Probability of replacing the commanded action by a uniformly random one."""

    budget: int = Field(default=300, gt=0)
    """Episode budget in primitive steps."""

    reward_mode: RewardMode = "all-objects"
    """all-objects pays +1 per object event, terminal-only pays +1 for the objective event only."""

    objective: Objective = "treasure"
    """Object event that ends the episode."""

    start: Cell | None = None
    key: Cell | None = None
    door: Cell | None = None
    treasure: Cell | None = None

    seed: int = 0
    """Default seed used by `GridWorld.reset` when none is given."""


class CompressionSpec(ConfigModel):
    cell_width: int = Field(default=4, ge=1)
    cell_height: int = Field(default=4, ge=1)
    origin_x: int = Field(default=0, ge=0)
    origin_y: int = Field(default=0, ge=0)


class TabularWorkerConfig(ConfigModel):
    learning_rate: float = Field(default=0.2, gt=0.0, le=1.0)
    epsilon: float = Field(default=0.1, ge=0.0, le=1.0)
    gamma: float = Field(default=0.99, gt=0.0, le=1.0)


class SILWorkerConfig(ConfigModel):
    hidden_sizes: tuple[int, ...] = (64, 64)
    learning_rate: float = Field(default=7e-4, gt=0.0)
    optimizer: OptimizerName = "sgd"
    gamma: float = Field(default=0.99, gt=0.0, le=1.0)
    n_steps: int = Field(default=6, ge=1)
    """On-policy rollout length between actor-critic updates."""

    entropy_weight: float = Field(default=0.01, ge=0.0)
    value_weight: float = Field(default=1.0, ge=0.0)
    """Weight of the on-policy value loss 0.5 * advantage^2."""

    sil_updates: int = Field(default=2, ge=0, le=4)
    sil_batch_size: int = Field(default=512, ge=1)
    sil_loss_weight: float = Field(default=1.0, ge=0.0)
    sil_value_weight: float = Field(default=0.01, ge=0.0)
    buffer_size: int = Field(default=10_000, ge=1)
    priority_alpha: float = Field(default=0.6, ge=0.0)
    priority_beta: float = Field(default=0.4, ge=0.0)
    priority_floor: float = Field(default=1e-5, gt=0.0)


class OptionConfig(ConfigModel):
    step_limit: int = Field(default=100, ge=1)
    """Time limit of navigate and task options."""

    success_reward: float = 0.8
    failure_reward: float = -0.1
    gamma: float = Field(default=0.99, gt=0.0, le=1.0)

    controllability: bool = False
    """Add the deferred controllability bonus to successful navigate options."""

    controllability_horizon: int = Field(default=10, ge=1)

    relabel: bool = False
    """Also train o_{z,z''} on a trajectory of o_{z,z'} that exited into z''."""


class ManagerConfig(ConfigModel):
    learning_rate: float = Field(default=0.1, gt=0.0, le=1.0)
    gamma: float = Field(default=0.99, gt=0.0, le=1.0)
    epsilon_start: float = Field(default=0.05, ge=0.0, le=1.0)
    epsilon_end: float = Field(default=0.005, ge=0.0, le=1.0)


class HRLAgentConfig(ConfigModel):
    worker: WorkerKind = "tabular"
    compression: CompressionSpec = Field(default_factory=CompressionSpec)
    tabular: TabularWorkerConfig = Field(default_factory=TabularWorkerConfig)
    sil: SILWorkerConfig = Field(default_factory=SILWorkerConfig)
    option: OptionConfig = Field(default_factory=OptionConfig)
    manager: ManagerConfig = Field(default_factory=ManagerConfig)


class FlatAgentConfig(ConfigModel):
    sil: SILWorkerConfig = Field(default_factory=lambda: SILWorkerConfig(sil_updates=4))
    bonus_beta: float = Field(default=0.2, ge=0.0)
    """Count-based exploration bonus scale; used by SIL-EXP only."""


class RunConfig(ConfigModel):
    experiment: ExperimentId = "exploration-kdt1"
    agents: list[str] = Field(default_factory=lambda: ["HRL-TAB"])
    reward_modes: list[RewardMode] = Field(default_factory=lambda: ["all-objects"])
    total_steps: int = Field(default=100_000, gt=0)
    """Training budget in primitive env steps, per task."""

    eval_interval: int = Field(default=2_000, gt=0)
    eval_episodes: int = Field(default=20, gt=0)
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    env: EnvConfig | None = None
    """Replaces the experiment's default environment when set."""

    worker: WorkerKind | None = None
    """Overrides the worker type implied by the HRL agent label."""

    region_size: int | None = Field(default=None, ge=1)
    """Square region size; overrides the per-layout default compression."""

    hrl: HRLAgentConfig = Field(default_factory=HRLAgentConfig)
    flat: FlatAgentConfig = Field(default_factory=FlatAgentConfig)
    output_dir: str | None = None
    parallel: int = Field(default=1, ge=1)
    save_snapshots: bool = True
    log_events: bool = False

    @model_validator(mode="after")
    def _check_agents(self) -> RunConfig:
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if not self.agents:
            raise ValueError("agents must not be empty")
        if not self.reward_modes:
            raise ValueError("reward_modes must not be empty")
        for agent in self.agents:
            check_agent(agent, self.experiment)
        return self


def check_agent(agent: str, experiment: str) -> None:
    base = agent.removeprefix(NO_TRANSFER_PREFIX)
    if base not in HRL_AGENTS + FLAT_AGENTS:
        raise ConfigurationError(f"Unknown agent: {agent}")
    if agent.startswith(NO_TRANSFER_PREFIX) and experiment != "transfer":
        raise ConfigurationError(f"Agent {agent} is only valid for the transfer experiment, got {experiment}")
    if experiment == "controllability" and base not in HRL_AGENTS:
        raise ConfigurationError(f"Agent {agent} is not valid for the controllability experiment")


def default_env_config(layout: str, **overrides: Any) -> EnvConfig:
    match layout:
        case "kdt1" | "kdt2":
            config = EnvConfig(layout=layout)
        case "hazard":
            config = EnvConfig(layout="hazard", action_noise=0.1, budget=500, objective="key")
        case _:
            raise ConfigurationError(f"Invalid layout id: {layout}. Use one of {', '.join(BUILTIN_LAYOUTS)}.")
    return config.model_copy(update=overrides)


def default_compression(layout: str) -> CompressionSpec:
    if layout == "hazard":
        return CompressionSpec(cell_width=5, cell_height=5)
    return CompressionSpec()


@cache
def get_output_root() -> Path:
    root = Path(os.getenv("OPTIONIZE_OUTPUT_DIR", "runs"))
    logger.debug(f"Using output root {root}")
    return root


def load_run_config(f: str | Path, **overrides: Any) -> RunConfig:
    path = Path(f)
    try:
        with path.open(encoding="utf-8") as fp:
            data = yaml.safe_load(fp) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigurationError(f"Failed to read config file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config file {path} must contain a mapping, got {type(data).__name__}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return parse_run_config(data)


def parse_run_config(data: dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid run config: {e}") from e
