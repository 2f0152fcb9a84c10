from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from pydantic import ValidationError
from loguru import logger

from .agents.factory import hrl_config_for
from .agents.hrl import HRLAgent
from .config import BUILTIN_LAYOUTS
from .config import EnvConfig
from .config import RunConfig
from .config import default_env_config
from .config import load_run_config
from .config import parse_run_config
from .envs.gridworld import GridWorld
from .errors import ConfigurationError
from .errors import OptionizeError
from .errors import PersistenceError
from .harness import evaluate
from .harness import run_experiment
from .harness import write_aggregate
from .utils import load_json
from .utils import save_text

RUN_FLAGS = (
    "experiment",
    "agents",
    "reward_modes",
    "total_steps",
    "eval_interval",
    "eval_episodes",
    "seeds",
    "output_dir",
    "parallel",
    "worker",
    "region_size",
)


def set_dotted(data: dict[str, Any], assignment: str) -> None:
    """Apply `a.b.c=value` to a nested mapping; the value is parsed as YAML."""
    key, sep, raw = assignment.partition("=")
    if not sep or not key:
        raise ConfigurationError(f"Invalid override {assignment!r}, expected key=value")
    *parents, leaf = key.split(".")
    node = data
    for part in parents:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigurationError(f"Cannot set {key}: {part} is not a section")
        node = child
    node[leaf] = yaml.safe_load(raw)


def build_run_config(args: argparse.Namespace) -> RunConfig:
    data: dict[str, Any] = {}
    if args.config is not None:
        data = load_run_config(args.config).model_dump(exclude_unset=True)
    for flag in RUN_FLAGS:
        value = getattr(args, flag, None)
        if value is not None:
            data[flag] = value
    if getattr(args, "no_snapshots", False):
        data["save_snapshots"] = False
    if getattr(args, "log_events", False):
        data["log_events"] = True
    for assignment in args.set or []:
        set_dotted(data, assignment)
    return parse_run_config(data)


def snapshot_env(stored: Any, layout: str | None, reward_mode: str | None) -> EnvConfig:
    """Env the snapshot was trained on, unless `layout` names a built-in map to score it on instead."""
    if layout is not None:
        env = default_env_config(layout)
    elif stored is not None:
        try:
            env = EnvConfig.model_validate(stored)
        except ValidationError as e:
            raise PersistenceError(f"Invalid env config in snapshot: {e}") from e
    else:
        env = default_env_config("kdt1")
    if reward_mode is not None:
        env = env.model_copy(update={"reward_mode": reward_mode})
    return env


def load_snapshot(
    snapshot: Path, config: RunConfig, layout: str | None = None, reward_mode: str | None = None
) -> tuple[HRLAgent, GridWorld]:
    try:
        state = load_json(snapshot / "agent.json")
        label = str(state["label"])
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise PersistenceError(f"Failed to read agent snapshot {snapshot}: {e}") from e
    env_config = snapshot_env(state.get("env"), layout, reward_mode)
    env = GridWorld(env_config)
    base_layout = env_config.base_layout or env_config.layout
    agent = HRLAgent.load(snapshot, env, hrl_config_for(label, config, base_layout), total_steps=config.total_steps)
    return agent, env


def cmd_run(args: argparse.Namespace) -> None:
    config = build_run_config(args)
    for path in run_experiment(config):
        print(path)


def cmd_eval(args: argparse.Namespace) -> None:
    config = build_run_config(args)
    agent, env = load_snapshot(Path(args.snapshot), config, args.layout, args.reward_mode)
    result = evaluate(agent, env, args.episodes, np.random.default_rng(args.seed))
    print(f"mean_return={result.mean_return} std_return={result.std_return} success_rate={result.success_rate}")


def cmd_aggregate(args: argparse.Namespace) -> None:
    print(write_aggregate(args.logs, args.output))


def cmd_dump_graph(args: argparse.Namespace) -> None:
    config = build_run_config(args)
    agent, _ = load_snapshot(Path(args.snapshot), config, args.layout)
    dot = agent.graph.to_dot()
    if args.output is None:
        print(dot, end="")
    else:
        save_text(dot, args.output)
    if args.q_table is not None:
        agent.manager.dump_csv(args.q_table)


def add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="YAML run config")
    parser.add_argument(
        "--set", action="append", metavar="KEY=VALUE", help="Override a config field, e.g. hrl.option.relabel=true"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optionize", description="Hierarchical option agents on gridworlds")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run an experiment")
    add_config_flags(run)
    run.add_argument("--experiment", choices=["exploration-kdt1", "exploration-kdt2", "transfer", "controllability"])
    run.add_argument("--agents", nargs="+")
    run.add_argument("--reward-modes", dest="reward_modes", nargs="+", choices=["all-objects", "terminal-only"])
    run.add_argument("--total-steps", dest="total_steps", type=int)
    run.add_argument("--eval-interval", dest="eval_interval", type=int)
    run.add_argument("--eval-episodes", dest="eval_episodes", type=int)
    run.add_argument("--seeds", nargs="+", type=int)
    run.add_argument("--output-dir", dest="output_dir")
    run.add_argument("--parallel", type=int)
    run.add_argument("--worker", choices=["tabular", "sil"])
    run.add_argument("--region-size", dest="region_size", type=int)
    run.add_argument("--no-snapshots", dest="no_snapshots", action="store_true")
    run.add_argument("--log-events", dest="log_events", action="store_true")
    run.set_defaults(func=cmd_run)

    evaluate_cmd = commands.add_parser("eval", help="Evaluate a saved HRL agent snapshot")
    add_config_flags(evaluate_cmd)
    evaluate_cmd.add_argument("snapshot")
    evaluate_cmd.add_argument(
        "--layout", choices=BUILTIN_LAYOUTS, default=None, help="Score on a built-in map instead of the trained task"
    )
    evaluate_cmd.add_argument(
        "--reward-mode", dest="reward_mode", choices=["all-objects", "terminal-only"], default=None
    )
    evaluate_cmd.add_argument("--episodes", type=int, default=20)
    evaluate_cmd.add_argument("--seed", type=int, default=0)
    evaluate_cmd.set_defaults(func=cmd_eval)

    aggregate = commands.add_parser("aggregate", help="Aggregate per-seed run logs")
    aggregate.add_argument("logs", nargs="+")
    aggregate.add_argument("--output", required=True)
    aggregate.set_defaults(func=cmd_aggregate)

    dump = commands.add_parser("dump-graph", help="Write the region graph of a snapshot as DOT")
    add_config_flags(dump)
    dump.add_argument("snapshot")
    dump.add_argument("--layout", choices=BUILTIN_LAYOUTS, default=None)
    dump.add_argument("--output", default=None)
    dump.add_argument("--q-table", dest="q_table", default=None, help="Also dump the manager Q-table as CSV")
    dump.set_defaults(func=cmd_dump_graph)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except OptionizeError as e:
        logger.error(str(e))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
