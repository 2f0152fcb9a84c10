"""Option construction and execution.

An option o = (initiation region z, worker policy, termination on leaving z). Navigate options
o_{z,z'} are rewarded for exiting into z', task options o_z^{s,s'} for changing the task state from
s to s' inside z, and exploration options follow a uniform random policy until the region or the
task state changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field
from typing import Any

import numpy as np
from loguru import logger

from .compression import Compressor
from .config import OptionConfig
from .envs.gridworld import N_ACTIONS
from .envs.gridworld import GridState
from .envs.gridworld import GridWorld
from .envs.gridworld import Inventory
from .envs.gridworld import Transition
from .errors import UsageError
from .workers.base import Worker
from .workers.base import WorkerStep

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):  # type: ignore[no-redef]
        __str__ = str.__str__
        __format__ = str.__format__

Edge = tuple[int, int]
TaskChange = tuple[Inventory, Inventory]


class OptionKind(StrEnum):
    NAVIGATE = "navigate"
    EXPLORE = "explore"
    TASK = "task"


class TerminationCause(StrEnum):
    REACHED_TARGET = "reached-target"
    WRONG_NEIGHBOR = "wrong-neighbor"
    REGION_CHANGE = "region-change"
    TIMEOUT = "timeout"
    TASK_STATE_CHANGE = "task-state-change"
    ENV_TERMINAL = "env-terminal"


def navigate_id(region: int, target: int) -> str:
    return f"nav:{region}->{target}"


def explore_id(region: int) -> str:
    return f"explore:{region}"


def task_id(region: int, change: TaskChange) -> str:
    return f"task:{region}:{int(change[0])}->{int(change[1])}"


@dataclass(eq=False)
class OptionSpec:
    option_id: str
    kind: OptionKind
    region: int
    target_region: int | None = None
    task_change: TaskChange | None = None
    step_limit: int | None = None
    """None for exploration options, which only stop on a region or task-state change."""

    worker: Worker | None = None

    @property
    def edge(self) -> Edge | None:
        if self.kind is not OptionKind.NAVIGATE or self.target_region is None:
            return None
        return (self.region, self.target_region)

    @classmethod
    def navigate(cls, region: int, target: int, step_limit: int, worker: Worker | None = None) -> OptionSpec:
        if region == target:
            raise UsageError(f"A navigate option needs two different regions, got {region} twice")
        option_id = navigate_id(region, target)
        return cls(option_id, OptionKind.NAVIGATE, region, target, step_limit=step_limit, worker=worker)

    @classmethod
    def explore(cls, region: int) -> OptionSpec:
        return cls(explore_id(region), OptionKind.EXPLORE, region)

    @classmethod
    def task(cls, region: int, change: TaskChange, step_limit: int, worker: Worker | None = None) -> OptionSpec:
        if change[0] == change[1]:
            raise UsageError(f"A task option needs a task-state change, got {change}")
        option_id = task_id(region, change)
        return cls(option_id, OptionKind.TASK, region, task_change=change, step_limit=step_limit, worker=worker)


@dataclass
class OptionOutcome:
    option: OptionSpec
    start_state: GridState
    final_state: GridState
    cause: TerminationCause
    duration: int
    task_reward: float
    """Discounted task reward sum_i gamma^i r_i collected while the option ran."""

    option_reward: float
    """Shaped reward of the final step."""

    trajectory: list[Transition] = field(default_factory=list)
    truncated: bool = False
    ticket: Any = None
    """Worker handle of the option episode, used to deliver a delayed bonus."""

    @property
    def start_region(self) -> int:
        return self.option.region

    @property
    def env_terminal(self) -> bool:
        return self.cause is TerminationCause.ENV_TERMINAL

    @property
    def success(self) -> bool:
        if self.option.kind is OptionKind.EXPLORE:
            return self.final_state.alive and self.cause in (
                TerminationCause.REGION_CHANGE,
                TerminationCause.TASK_STATE_CHANGE,
            )
        return self.cause is TerminationCause.REACHED_TARGET


def exploration_policy(state: GridState, rng: np.random.Generator) -> int:
    return int(rng.integers(N_ACTIONS))


class OptionRuntime:
    """Runs options on an environment and feeds the option MDP to their workers."""

    def __init__(
        self,
        compressor: Compressor,
        config: OptionConfig,
        rng: np.random.Generator,
        task_gamma: float = 0.99,
    ) -> None:
        self.compressor = compressor
        self.config = config
        self.rng = rng
        self.task_gamma = task_gamma

    def target_reached(self, option: OptionSpec, next_state: GridState) -> bool:
        if not next_state.alive:
            return False
        match option.kind:
            case OptionKind.NAVIGATE:
                return self.compressor.region_of(next_state) == option.target_region
            case OptionKind.TASK:
                assert option.task_change is not None
                return (
                    self.compressor.region_of(next_state) == option.region
                    and next_state.inventory == option.task_change[1]
                )
            case _:
                return False

    def option_reward(
        self,
        state: GridState,
        action: int,
        next_state: GridState,
        option: OptionSpec,
        step_count: int,
    ) -> float:
        if option.kind is OptionKind.EXPLORE:
            return 0.0
        if self.target_reached(option, next_state):
            return self.config.success_reward
        if (
            not next_state.alive
            or self.compressor.region_of(next_state) != option.region
            or next_state.inventory != state.inventory
            or (option.step_limit is not None and step_count >= option.step_limit)
        ):
            return self.config.failure_reward
        return 0.0

    def termination_cause(
        self,
        state: GridState,
        next_state: GridState,
        option: OptionSpec,
        step_count: int,
        env: GridWorld,
    ) -> TerminationCause | None:
        if self.target_reached(option, next_state):
            return TerminationCause.REACHED_TARGET
        if env.is_terminal(next_state):
            return TerminationCause.ENV_TERMINAL
        if self.compressor.region_of(next_state) != option.region:
            if option.kind is OptionKind.NAVIGATE:
                return TerminationCause.WRONG_NEIGHBOR
            return TerminationCause.REGION_CHANGE
        if next_state.inventory != state.inventory:
            return TerminationCause.TASK_STATE_CHANGE
        if option.step_limit is not None and step_count >= option.step_limit:
            return TerminationCause.TIMEOUT
        return None

    def act(self, option: OptionSpec, state: GridState, greedy: bool, rng: np.random.Generator | None) -> int:
        if option.kind is OptionKind.EXPLORE:
            return exploration_policy(state, self.rng if rng is None else rng)
        if option.worker is None:
            raise UsageError(f"Option {option.option_id} has no worker")
        return option.worker.act(state, greedy=greedy, rng=rng)

    @staticmethod
    def worker_step(
        transition: Transition, reward: float, cause: TerminationCause | None, truncated: bool
    ) -> WorkerStep:
        """Exits, deaths and task changes enter an absorbing super-state; timeouts and budget ends bootstrap."""
        absorbing = cause is not None and cause is not TerminationCause.TIMEOUT and not truncated
        return WorkerStep(
            state=transition.state,
            action=transition.action,
            reward=reward,
            next_state=None if absorbing else transition.next_state,
        )

    def run_option(
        self,
        start: GridState,
        option: OptionSpec,
        env: GridWorld,
        learn: bool = True,
        greedy: bool = False,
        rng: np.random.Generator | None = None,
    ) -> OptionOutcome:
        """Execute `option` from `start` until it terminates.

        With `rng` given, it drives both the policy and the action noise, leaving the environment's
        and the workers' own generators untouched.
        """
        if self.compressor.region_of(start) != option.region:
            raise UsageError(
                f"Start {start.position} is in region {self.compressor.region_of(start)}, "
                f"outside the initiation region of {option.option_id}"
            )
        if env.is_terminal(start):
            raise UsageError(f"Cannot run {option.option_id} from terminal state {start}")

        state = start
        trajectory: list[Transition] = []
        task_reward = 0.0
        reward = 0.0
        cause: TerminationCause | None = None
        while cause is None:
            action = self.act(option, state, greedy, rng)
            transition = env.step(state, action, rng=rng)
            next_state = transition.next_state
            task_reward += self.task_gamma ** len(trajectory) * transition.reward
            trajectory.append(transition)

            step_count = len(trajectory)
            cause = self.termination_cause(state, next_state, option, step_count, env)
            reward = self.option_reward(state, action, next_state, option, step_count)
            truncated = env.is_truncated(next_state) and cause is TerminationCause.ENV_TERMINAL
            if truncated:
                reward = 0.0
            if learn and option.worker is not None:
                option.worker.observe(self.worker_step(transition, reward, cause, truncated))
            state = next_state

        assert cause is not None
        ticket = option.worker.end_episode() if learn and option.worker is not None else None
        outcome = OptionOutcome(
            option=option,
            start_state=start,
            final_state=state,
            cause=cause,
            duration=len(trajectory),
            task_reward=task_reward,
            option_reward=reward,
            trajectory=trajectory,
            truncated=env.is_truncated(state),
            ticket=ticket,
        )
        logger.debug(f"{option.option_id} ended by {cause} after {outcome.duration} steps, reward {reward}")
        return outcome

    def relabel(self, outcome: OptionOutcome, other: OptionSpec) -> list[WorkerStep]:
        """Worker steps of `outcome`'s trajectory as seen by `other`, an option of the same region."""
        if other.region != outcome.option.region:
            raise UsageError(f"Cannot relabel {outcome.option.option_id} for {other.option_id}")
        steps = []
        for i, transition in enumerate(outcome.trajectory, start=1):
            reward = self.option_reward(transition.state, transition.action, transition.next_state, other, i)
            last = i == len(outcome.trajectory)
            steps.append(self.worker_step(transition, reward, outcome.cause if last else None, outcome.truncated))
        return steps
