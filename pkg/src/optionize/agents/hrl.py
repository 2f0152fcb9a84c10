"""Hierarchical agent: a manager choosing options over a growing region graph."""

from __future__ import annotations

import zlib
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger

from ..compression import Compressor
from ..config import HRLAgentConfig
from ..controllability import ControllabilityTracker
from ..envs.gridworld import GridState
from ..envs.gridworld import GridWorld
from ..envs.gridworld import Inventory
from ..errors import PersistenceError
from ..errors import UsageError
from ..manager import EpsilonSchedule
from ..manager import ManagerQ
from ..manager import TaskStateRegistry
from ..manager import admissible_options
from ..manager import reset_for_transfer
from ..options import OptionKind
from ..options import OptionOutcome
from ..options import OptionRuntime
from ..options import OptionSpec
from ..options import TerminationCause
from ..region_graph import RegionGraph
from ..utils import PathLike
from ..utils import load_json
from ..utils import save_csv
from ..utils import save_json
from ..workers.base import ObservationEncoder
from ..workers.base import Worker
from ..workers.base import restore_rng
from ..workers.base import rng_state
from ..workers.factory import make_worker
from .base import AgentStats
from .base import EpisodeResult
from .base import episode_seed

EVENT_FIELDS = ["episode", "option", "kind", "edge", "cause", "duration", "option_reward", "task_reward", "rho"]


class HRLAgent:
    def __init__(
        self,
        env: GridWorld,
        config: HRLAgentConfig,
        seed: int = 0,
        label: str = "HRL-TAB",
        total_steps: int = 100_000,
        log_events: bool = False,
    ) -> None:
        self.env = env
        self.config = config
        self.seed = seed
        self.label = label
        self.compressor = Compressor(config.compression, env.width)
        self.rng = np.random.default_rng([seed, 0])
        self.episode_rng = np.random.default_rng([seed, 1])
        self.runtime = OptionRuntime(self.compressor, config.option, self.rng, task_gamma=config.manager.gamma)
        self.graph = RegionGraph(config.compression, self.make_worker, config.option.step_limit)
        self.registry = TaskStateRegistry(self.make_worker, config.option.step_limit)
        self.manager = ManagerQ(config.manager, self.rng)
        self.total_steps = total_steps
        self.epsilon = EpsilonSchedule(config.manager.epsilon_start, config.manager.epsilon_end, total_steps)
        self.tracker = (
            ControllabilityTracker(config.option.controllability_horizon) if config.option.controllability else None
        )
        self.log_events = log_events
        self.events: list[dict[str, Any]] = []

        self.steps = 0
        self.episodes = 0
        self.deaths = 0
        self.region_transitions = 0
        self._task_origin = 0
        self._state: GridState | None = None

    def make_worker(self, option: OptionSpec) -> Worker:
        rng = np.random.default_rng([self.seed, zlib.crc32(option.option_id.encode("utf-8"))])
        encoder = ObservationEncoder(self.env.width, self.env.height, include_inventory=option.kind is OptionKind.TASK)
        return make_worker(self.config.worker, self.config, encoder, rng)

    def region_of(self, state: GridState) -> int:
        return self.compressor.region_of(state)

    def admissible(self, region: int, task_state: Inventory) -> list[OptionSpec]:
        explore = self.graph.explore_option(region)
        return admissible_options(region, task_state, explore, self.graph.options_for(region), self.registry)

    def set_env(self, env: GridWorld) -> None:
        if env.width != self.env.width or env.height != self.env.height:
            raise UsageError(
                f"New env is {env.width}x{env.height}, the region graph was built on {self.env.width}x{self.env.height}"
            )
        self._end_episode(completed=False)
        self.env = env

    def reset_for_transfer(self) -> None:
        """Reset the manager policy for a new task; call `set_env` first so no episode is in flight."""
        if self._state is not None:
            raise UsageError("reset_for_transfer called mid-episode, call set_env first")
        reset_for_transfer(self.manager, self.registry)
        self._task_origin = self.steps

    def train_until(self, target_steps: int) -> None:
        """Train until `target_steps` primitive steps in total, resuming any unfinished episode."""
        while self.steps < target_steps:
            if self._state is None:
                self._begin_episode()
            self._run_one_option()

    def _begin_episode(self) -> None:
        state = self.env.reset(seed=episode_seed(self.episode_rng))
        self.graph.add_region(self.region_of(state))
        self._state = state

    def _end_episode(self, completed: bool = True) -> None:
        if self.tracker is not None:
            for bonus in self.tracker.flush():
                bonus.deliver()
        if completed:
            self.episodes += 1
        self._state = None

    def _discover(self, outcome: OptionOutcome) -> None:
        for transition in outcome.trajectory:
            before, after = transition.state, transition.next_state
            if after.inventory != before.inventory:
                self.registry.observe_task_change(self.region_of(after), before.inventory, after.inventory)
            region, next_region = self.region_of(before), self.region_of(after)
            if region != next_region and after.alive:
                self.graph.observe_transition(region, next_region)
                self.region_transitions += 1
        if not outcome.final_state.alive:
            self.deaths += 1

    def _relabel(self, outcome: OptionOutcome) -> None:
        edge = (outcome.option.region, self.region_of(outcome.final_state))
        other = self.graph.navigate_option(edge)
        if other is None or other.worker is None:
            return
        other.worker.learn_offline(self.runtime.relabel(outcome, other))

    def _run_one_option(self) -> None:
        assert self._state is not None
        state = self._state
        region, task_state = self.region_of(state), state.inventory
        admissible = self.admissible(region, task_state)
        option = self.manager.get_option((region, task_state), admissible, self.epsilon(self.steps - self._task_origin))
        outcome = self.runtime.run_option(state, option, self.env, learn=True)
        self.steps += outcome.duration

        self._discover(outcome)
        if option.edge is not None:
            self.graph.record_option_outcome(option.edge, outcome.success)
        if self.config.option.relabel and outcome.cause is TerminationCause.WRONG_NEIGHBOR:
            self._relabel(outcome)

        rho: float | None = None
        if self.tracker is not None:
            for bonus in self.tracker.update_outcome(outcome):
                bonus.deliver()
                rho = bonus.rho

        final = outcome.final_state
        terminal = not final.alive or self.env.objective_reached(final)
        next_state = (self.region_of(final), final.inventory)
        next_admissible = [] if terminal else self.admissible(*next_state)
        self.manager.update_policy((region, task_state), option, outcome, next_state, next_admissible, terminal)

        if self.log_events:
            self.events.append(
                {
                    "episode": self.episodes,
                    "option": option.option_id,
                    "kind": str(option.kind),
                    "edge": "" if option.edge is None else f"{option.edge[0]}->{option.edge[1]}",
                    "cause": str(outcome.cause),
                    "duration": outcome.duration,
                    "option_reward": outcome.option_reward,
                    "task_reward": outcome.task_reward,
                    "rho": "" if rho is None else rho,
                }
            )

        self._state = final
        if self.env.is_terminal(final):
            self._end_episode()

    def evaluate_episode(self, env: GridWorld, rng: np.random.Generator) -> EpisodeResult:
        """Greedy rollout without learning. Leaves every part of the agent untouched."""
        state = env.start_state()
        total = 0.0
        while not env.is_terminal(state):
            region = self.region_of(state)
            if region in self.graph:
                admissible = self.admissible(region, state.inventory)
            else:
                admissible = [OptionSpec.explore(region)]
            option = self.manager.get_option((region, state.inventory), admissible, epsilon=0.0, rng=rng)
            outcome = self.runtime.run_option(state, option, env, learn=False, greedy=True, rng=rng)
            total += sum(t.reward for t in outcome.trajectory)
            state = outcome.final_state
        return EpisodeResult(
            episode_return=total,
            steps=state.t,
            success=env.objective_reached(state),
            died=not state.alive,
        )

    def stats(self) -> AgentStats:
        n_options = len(self.graph.regions) + len(self.graph.navigate_options) + len(self.registry.options)
        return AgentStats(
            regions=len(self.graph.regions),
            options=n_options,
            edge_success_mean=self.graph.mean_success_rate(),
            deaths_per_transition=self.deaths / max(self.region_transitions, 1),
        )

    def dump_events(self, f: PathLike) -> None:
        save_csv(self.events, f, EVENT_FIELDS)

    def save(self, d: str | Path) -> None:
        """Snapshot the region graph, manager and task options into directory `d`."""
        path = Path(d)
        path.mkdir(parents=True, exist_ok=True)
        self.graph.save(path / "graph.json")
        try:
            save_json(
                {
                    "label": self.label,
                    "seed": self.seed,
                    "env": self.env.config.model_dump(mode="json"),
                    "steps": self.steps,
                    "episodes": self.episodes,
                    "deaths": self.deaths,
                    "region_transitions": self.region_transitions,
                    "manager": self.manager.state_dict(),
                    "registry": self.registry.state_dict(),
                    "rng": rng_state(self.rng),
                    "episode_rng": rng_state(self.episode_rng),
                },
                path / "agent.json",
            )
        except (OSError, ValueError) as e:
            logger.error(f"Failed to save agent snapshot to {path}: {e}")
            raise PersistenceError(f"Failed to save agent snapshot to {path}: {e}") from e

    @classmethod
    def load(cls, d: str | Path, env: GridWorld, config: HRLAgentConfig, total_steps: int = 100_000) -> HRLAgent:
        path = Path(d)
        try:
            state = load_json(path / "agent.json")
        except (OSError, ValueError) as e:
            raise PersistenceError(f"Failed to read agent snapshot {path}: {e}") from e
        try:
            agent = cls(env, config, seed=int(state["seed"]), label=str(state["label"]), total_steps=total_steps)
            agent.graph = RegionGraph.load(path / "graph.json", agent.make_worker)
            agent.manager.load_state_dict(state["manager"])
            agent.registry.load_state_dict(state["registry"])
            agent.steps = int(state["steps"])
            agent.episodes = int(state["episodes"])
            agent.deaths = int(state["deaths"])
            agent.region_transitions = int(state["region_transitions"])
            agent.rng = restore_rng(state["rng"])
            agent.episode_rng = restore_rng(state["episode_rng"])
        except (KeyError, TypeError, ValueError) as e:
            raise PersistenceError(f"Corrupt agent snapshot {path}: {e}") from e
        agent.runtime.rng = agent.manager.rng = agent.rng
        logger.info(f"Loaded {agent.label} snapshot from {path} at {agent.steps} steps")
        return agent
