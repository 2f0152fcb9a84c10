"""Experiment runner: trains agents per seed, evaluates on a step grid and writes CSV logs."""

from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger

from .agents.base import Agent
from .agents.factory import get_agent
from .agents.hrl import HRLAgent
from .config import NO_TRANSFER_PREFIX
from .config import EnvConfig
from .config import RewardMode
from .config import RunConfig
from .config import default_env_config
from .config import get_output_root
from .envs.generator import generate_task
from .envs.generator import mirror_task
from .envs.gridworld import GridWorld
from .errors import PersistenceError
from .errors import UsageError
from .utils import PathLike
from .utils import load_csv
from .utils import save_csv

SCHEMA_VERSION = 1

RUN_LOG_FIELDS = [
    "schema",
    "task",
    "steps",
    "episodes",
    "mean_return",
    "std_return",
    "success_rate",
    "regions",
    "options",
    "edge_success_mean",
    "deaths_per_transition",
]

AGGREGATE_FIELDS = ["schema", "steps", "n_seeds", "mean_return", "std_return", "success_mean", "success_std"]

TRANSFER_TASK_SEED_OFFSET = 1_000


@dataclass(frozen=True)
class Task:
    name: str
    env: EnvConfig


@dataclass(frozen=True)
class EvalResult:
    mean_return: float
    std_return: float
    success_rate: float


def experiment_tasks(config: RunConfig, reward_mode: RewardMode, seed: int) -> list[Task]:
    """The sequence of tasks an agent is trained on; one task except for the transfer experiment."""
    match config.experiment:
        case "exploration-kdt1" | "exploration-kdt2":
            layout = config.experiment.removeprefix("exploration-")
            env = config.env or default_env_config(layout)
            return [Task(layout, env.model_copy(update={"reward_mode": reward_mode}))]
        case "controllability":
            env = config.env or default_env_config("hazard")
            return [Task("hazard", env.model_copy(update={"reward_mode": reward_mode}))]
        case "transfer":
            base = (config.env or default_env_config("kdt1")).model_copy(update={"reward_mode": reward_mode})
            first = generate_task(base, seed).model_copy(update={"objective": "door"})
            second = generate_task(base, seed + TRANSFER_TASK_SEED_OFFSET).model_copy(update={"objective": "treasure"})
            return [Task("task1", first), Task("task2", second), Task("task3", mirror_task(second))]
        case _:
            raise UsageError(f"Unknown experiment {config.experiment}")


def evaluate(agent: Agent, env: GridWorld, n_episodes: int, rng: np.random.Generator) -> EvalResult:
    """Greedy evaluation; the agent's training state is not touched."""
    results = [agent.evaluate_episode(env, rng) for _ in range(n_episodes)]
    returns = np.asarray([r.episode_return for r in results])
    return EvalResult(
        mean_return=float(returns.mean()),
        std_return=float(returns.std()),
        success_rate=float(np.mean([r.success for r in results])),
    )


def eval_grid(total_steps: int, interval: int) -> list[int]:
    grid = list(range(0, total_steps + 1, interval))
    if grid[-1] != total_steps:
        grid.append(total_steps)
    return grid


def seed_dir(config: RunConfig, reward_mode: RewardMode, label: str) -> Path:
    root = Path(config.output_dir) if config.output_dir is not None else get_output_root()
    return root / config.experiment / reward_mode / label


def run_seed(config: RunConfig, reward_mode: RewardMode, label: str, seed: int) -> Path:
    """Train and evaluate one agent on one seed. Returns the written run log."""
    out_dir = seed_dir(config, reward_mode, label)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error(f"Cannot create output directory {out_dir}: {e}")
        raise PersistenceError(f"Cannot create output directory {out_dir}: {e}") from e

    logger.info(f"Running {label} on {config.experiment} ({reward_mode}), seed {seed}")
    tasks = experiment_tasks(config, reward_mode, seed)
    grid = eval_grid(config.total_steps, config.eval_interval)
    agent: Agent | None = None
    rows: list[dict[str, Any]] = []
    for index, task in enumerate(tasks):
        env = GridWorld(task.env)
        eval_env = GridWorld(task.env)
        if agent is None or label.startswith(NO_TRANSFER_PREFIX):
            agent = get_agent(label, env, config, seed)
        else:
            agent.set_env(env)
            agent.reset_for_transfer()

        origin = agent.steps
        offset = index * config.total_steps
        for point in grid:
            agent.train_until(origin + point)
            result = evaluate(agent, eval_env, config.eval_episodes, np.random.default_rng([seed, 2, offset + point]))
            stats = agent.stats()
            rows.append(
                {
                    "schema": SCHEMA_VERSION,
                    "task": task.name,
                    "steps": offset + point,
                    "episodes": agent.episodes,
                    "mean_return": result.mean_return,
                    "std_return": result.std_return,
                    "success_rate": result.success_rate,
                    "regions": stats.regions,
                    "options": stats.options,
                    "edge_success_mean": stats.edge_success_mean,
                    "deaths_per_transition": stats.deaths_per_transition,
                }
            )
            logger.info(
                f"{label} seed {seed} {task.name} step {offset + point}: "
                f"return {result.mean_return:.3f}, success {result.success_rate:.2f}"
            )

        if config.save_snapshots and isinstance(agent, HRLAgent):
            agent.save(out_dir / f"seed{seed}" / task.name)
        if config.log_events and isinstance(agent, HRLAgent):
            agent.dump_events(out_dir / f"seed{seed}" / f"{task.name}_events.csv")

    path = out_dir / f"seed{seed}.csv"
    save_csv(rows, path, RUN_LOG_FIELDS)
    return path


def _run_seed_job(job: tuple[RunConfig, RewardMode, str, int]) -> Path:
    return run_seed(*job)


def run_experiment(config: RunConfig) -> list[Path]:
    """Run every (reward mode, agent, seed) of `config`. Returns the per-seed logs and aggregates."""
    jobs = [
        (config, reward_mode, label, seed)
        for reward_mode in config.reward_modes
        for label in config.agents
        for seed in config.seeds
    ]
    if config.parallel > 1:
        with ProcessPoolExecutor(max_workers=config.parallel) as pool:
            logs = list(pool.map(_run_seed_job, jobs))
    else:
        logs = [_run_seed_job(job) for job in jobs]

    outputs = list(logs)
    for reward_mode in config.reward_modes:
        for label in config.agents:
            out_dir = seed_dir(config, reward_mode, label)
            seed_logs = [out_dir / f"seed{seed}.csv" for seed in config.seeds]
            outputs.append(write_aggregate(seed_logs, out_dir / "aggregate.csv"))
    return outputs


def _curve(rows: Sequence[dict[str, str]], column: str) -> np.ndarray:
    return np.asarray([float(row[column]) for row in rows])


def plot_data(logs: Sequence[PathLike]) -> list[dict[str, Any]]:
    """Mean and std across seeds per eval point, ready for plotting.

    Logs on different step grids are interpolated onto the coarsest one.
    """
    if not logs:
        raise UsageError("plot_data needs at least one run log")
    tables = [load_csv(f) for f in logs]
    for f, table in zip(logs, tables, strict=True):
        if not table:
            raise UsageError(f"Run log {f} has no rows")

    grids = [_curve(table, "steps") for table in tables]
    coarsest = min(grids, key=len)
    returns = []
    successes = []
    mismatched = False
    for grid, table in zip(grids, tables, strict=True):
        mean_return, success = _curve(table, "mean_return"), _curve(table, "success_rate")
        if len(grid) != len(coarsest) or not np.array_equal(grid, coarsest):
            mismatched = True
            mean_return = np.interp(coarsest, grid, mean_return)
            success = np.interp(coarsest, grid, success)
        returns.append(mean_return)
        successes.append(success)
    if mismatched:
        logger.warning(f"Run logs use different step grids, resampled onto {len(coarsest)} points")

    returns_matrix = np.vstack(returns)
    success_matrix = np.vstack(successes)
    return [
        {
            "schema": SCHEMA_VERSION,
            "steps": int(step),
            "n_seeds": len(tables),
            "mean_return": float(returns_matrix[:, i].mean()),
            "std_return": float(returns_matrix[:, i].std()),
            "success_mean": float(success_matrix[:, i].mean()),
            "success_std": float(success_matrix[:, i].std()),
        }
        for i, step in enumerate(coarsest)
    ]


def write_aggregate(logs: Sequence[PathLike], f: PathLike) -> Path:
    path = Path(f)
    save_csv(plot_data(logs), path, AGGREGATE_FIELDS)
    logger.info(f"Wrote aggregate of {len(logs)} logs to {path}")
    return path
