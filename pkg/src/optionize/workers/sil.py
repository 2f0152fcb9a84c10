"""Actor-critic with self-imitation.

The minimised objective is

    policy:  -mean(log π(a|s) A)          - α mean(H(π(·|s)))     (on-policy, A = R_n - V(s) held fixed)
             -mean(w log π(a|s) (R - V(s))+) * sil_loss_weight   (replay)
    value:    mean(½ (R_n - V(s))²) * value_weight
             +mean(w ½ (R - V(s))+²) * sil_value_weight           (replay)

Advantages entering the policy terms are treated as constants, so policy and value gradients are
independent.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from typing import Any

import numpy as np
from loguru import logger

from ..config import SILWorkerConfig
from ..envs.gridworld import N_ACTIONS
from ..envs.gridworld import GridState
from ..errors import PersistenceError
from ..errors import UsageError
from .base import ObservationEncoder
from .base import WorkerStep
from .base import restore_rng
from .base import rng_state
from .mlp import Params
from .mlp import init_mlp
from .mlp import log_softmax
from .mlp import mlp_backward
from .mlp import mlp_forward
from .mlp import params_from_lists
from .mlp import params_to_lists
from .mlp import softmax
from .optim import make_optimizer
from .replay import PrioritizedReplayBuffer


@dataclass(frozen=True)
class LossBatch:
    obs: np.ndarray
    actions: np.ndarray
    returns: np.ndarray
    weights: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.actions)


@dataclass
class LossResult:
    loss: float
    policy_loss: float
    value_loss: float
    entropy: float
    policy_grads: Params
    value_grads: Params
    sil_advantages: np.ndarray = field(default_factory=lambda: np.zeros(0))
    """Clipped advantages (R - V)+ of the replay batch, used to refresh priorities."""


def sil_loss(
    policy_params: Params,
    value_params: Params,
    on_policy: LossBatch | None,
    replay: LossBatch | None,
    config: SILWorkerConfig,
) -> LossResult:
    batches = [b for b in (on_policy, replay) if b is not None and len(b) > 0]
    if not batches:
        raise UsageError("sil_loss needs a non-empty on-policy or replay batch")

    policy_loss = value_loss = entropy = 0.0
    policy_grads = {name: np.zeros_like(p) for name, p in policy_params.items()}
    value_grads = {name: np.zeros_like(p) for name, p in value_params.items()}
    sil_advantages = np.zeros(0)

    def accumulate(target: Params, grads: Params) -> None:
        for name, grad in grads.items():
            target[name] += grad

    if on_policy is not None and len(on_policy) > 0:
        n = len(on_policy)
        logits, policy_cache = mlp_forward(policy_params, on_policy.obs)
        values, value_cache = mlp_forward(value_params, on_policy.obs)
        values = values[:, 0]
        log_probs = log_softmax(logits)
        probs = np.exp(log_probs)
        rows = np.arange(n)
        advantages = on_policy.returns - values
        per_state_entropy = -(probs * log_probs).sum(axis=1)

        policy_loss += float(-(log_probs[rows, on_policy.actions] * advantages).mean())
        policy_loss += float(-config.entropy_weight * per_state_entropy.mean())
        value_loss += float(config.value_weight * 0.5 * (advantages**2).mean())
        entropy = float(per_state_entropy.mean())

        one_hot = np.zeros_like(probs)
        one_hot[rows, on_policy.actions] = 1.0
        grad_logits = (probs - one_hot) * advantages[:, None] / n
        grad_logits += config.entropy_weight * probs * (log_probs + per_state_entropy[:, None]) / n
        accumulate(policy_grads, mlp_backward(policy_params, policy_cache, grad_logits))
        grad_values = config.value_weight * (-advantages) / n
        accumulate(value_grads, mlp_backward(value_params, value_cache, grad_values[:, None]))

    if replay is not None and len(replay) > 0:
        n = len(replay)
        weights = np.ones(n) if replay.weights is None else replay.weights
        logits, policy_cache = mlp_forward(policy_params, replay.obs)
        values, value_cache = mlp_forward(value_params, replay.obs)
        values = values[:, 0]
        log_probs = log_softmax(logits)
        probs = np.exp(log_probs)
        rows = np.arange(n)
        clipped = np.maximum(replay.returns - values, 0.0)
        sil_advantages = clipped

        policy_loss += float(config.sil_loss_weight * -(weights * log_probs[rows, replay.actions] * clipped).mean())
        value_loss += float(config.sil_value_weight * (weights * 0.5 * clipped**2).mean())

        one_hot = np.zeros_like(probs)
        one_hot[rows, replay.actions] = 1.0
        grad_logits = config.sil_loss_weight * (probs - one_hot) * (weights * clipped)[:, None] / n
        accumulate(policy_grads, mlp_backward(policy_params, policy_cache, grad_logits))
        grad_values = config.sil_value_weight * weights * (-clipped) / n
        accumulate(value_grads, mlp_backward(value_params, value_cache, grad_values[:, None]))

    return LossResult(
        loss=policy_loss + value_loss,
        policy_loss=policy_loss,
        value_loss=value_loss,
        entropy=entropy,
        policy_grads=policy_grads,
        value_grads=value_grads,
        sil_advantages=sil_advantages,
    )


def discounted_returns(rewards: Sequence[float], gamma: float, bootstrap: float = 0.0) -> np.ndarray:
    returns = np.zeros(len(rewards))
    running = bootstrap
    for i in reversed(range(len(rewards))):
        running = rewards[i] + gamma * running
        returns[i] = running
    return returns


class SILWorker:
    """Policy and value MLPs trained with n-step actor-critic plus self-imitation replay."""

    kind = "sil"

    def __init__(self, config: SILWorkerConfig, encoder: ObservationEncoder, rng: np.random.Generator) -> None:
        self.config = config
        self.encoder = encoder
        self.rng = rng
        hidden = list(config.hidden_sizes)
        self.policy_params = init_mlp([encoder.dim, *hidden, N_ACTIONS], rng)
        self.value_params = init_mlp([encoder.dim, *hidden, 1], rng, output_scale=1.0 / np.sqrt(hidden[-1]))
        self.policy_optimizer = make_optimizer(config.optimizer, config.learning_rate)
        self.value_optimizer = make_optimizer(config.optimizer, config.learning_rate)
        self.replay = PrioritizedReplayBuffer(
            capacity=config.buffer_size,
            obs_dim=encoder.dim,
            alpha=config.priority_alpha,
            beta=config.priority_beta,
            floor=config.priority_floor,
        )
        self._rollout: list[WorkerStep] = []
        self._episode: list[WorkerStep] = []
        self._episode_id = 0

    def probabilities(self, state: GridState) -> np.ndarray:
        logits, _ = mlp_forward(self.policy_params, self.encoder(state))
        return softmax(logits)[0]

    def value(self, states: Sequence[GridState]) -> np.ndarray:
        values, _ = mlp_forward(self.value_params, np.stack([self.encoder(s) for s in states]))
        return values[:, 0]

    def act(self, state: GridState, greedy: bool = False, rng: np.random.Generator | None = None) -> int:
        rng = self.rng if rng is None else rng
        probs = self.probabilities(state)
        if greedy:
            return int(np.argmax(probs))
        return int(rng.choice(N_ACTIONS, p=probs))

    def observe(self, step: WorkerStep) -> None:
        self._rollout.append(step)
        self._episode.append(step)
        if len(self._rollout) >= self.config.n_steps or step.terminal:
            self._train_on_policy()

    def _train_on_policy(self) -> None:
        if not self._rollout:
            return
        last = self._rollout[-1]
        bootstrap = 0.0 if last.next_state is None else float(self.value([last.next_state])[0])
        returns = discounted_returns([s.reward for s in self._rollout], self.config.gamma, bootstrap)
        batch = LossBatch(
            obs=np.stack([self.encoder(s.state) for s in self._rollout]),
            actions=np.asarray([s.action for s in self._rollout]),
            returns=returns,
        )
        self._apply(sil_loss(self.policy_params, self.value_params, batch, None, self.config))
        self._rollout = []

    def _apply(self, result: LossResult) -> None:
        self.policy_optimizer.step(self.policy_params, result.policy_grads)
        self.value_optimizer.step(self.value_params, result.value_grads)

    def _push_episode(self, steps: Sequence[WorkerStep], episode: int) -> None:
        returns = discounted_returns([s.reward for s in steps], self.config.gamma)
        values = self.value([s.state for s in steps])
        last = len(steps) - 1
        for i, (step, ret, value) in enumerate(zip(steps, returns, values, strict=True)):
            self.replay.add(self.encoder(step.state), step.action, ret, ret - value, episode=episode, offset=last - i)

    def train_self_imitation(self) -> LossResult | None:
        if len(self.replay) == 0 or self.config.sil_updates == 0:
            return None
        result = None
        for _ in range(self.config.sil_updates):
            sample = self.replay.sample(min(self.config.sil_batch_size, len(self.replay)), self.rng)
            batch = LossBatch(obs=sample.obs, actions=sample.actions, returns=sample.returns, weights=sample.weights)
            result = sil_loss(self.policy_params, self.value_params, None, batch, self.config)
            self._apply(result)
            self.replay.update_priorities(sample.indices, result.sil_advantages)
        return result

    def end_episode(self) -> int | None:
        """Flush the rollout, store the episode for self-imitation and run the replay updates.

        Returns the episode ticket used to deliver a delayed bonus, or None for an empty episode.
        """
        self._train_on_policy()
        if not self._episode:
            return None
        ticket = self._episode_id
        self._push_episode(self._episode, ticket)
        self._episode = []
        self._episode_id += 1
        self.train_self_imitation()
        return ticket

    def apply_bonus(self, ticket: int | None, bonus: float) -> None:
        if ticket is None:
            return
        amended = self.replay.amend_episode(ticket, bonus, self.config.gamma)
        if amended == 0:
            logger.warning(f"Bonus for episode {ticket} arrived after its entries were evicted")
            return
        (indices,) = np.nonzero(self.replay.episodes[: len(self.replay)] == ticket)
        values, _ = mlp_forward(self.value_params, self.replay.obs[indices])
        self.replay.update_priorities(indices, self.replay.returns[indices] - values[:, 0])

    def learn_offline(self, steps: Sequence[WorkerStep]) -> None:
        if not steps:
            return
        self._push_episode(steps, episode=-1)

    def clear_replay(self) -> None:
        self.replay.clear()

    def state_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "policy": params_to_lists(self.policy_params),
            "value": params_to_lists(self.value_params),
            "policy_optimizer": self.policy_optimizer.state_dict(),
            "value_optimizer": self.value_optimizer.state_dict(),
            "episode_id": self._episode_id,
            "rng": rng_state(self.rng),
        }

    def load_state_dict(self, state: dict[str, Any]) -> None:
        if state.get("kind") != self.kind:
            raise PersistenceError(f"Expected a {self.kind} worker state, got {state.get('kind')!r}")
        try:
            self.policy_params = params_from_lists(state["policy"])
            self.value_params = params_from_lists(state["value"])
            self.policy_optimizer.load_state_dict(state["policy_optimizer"])
            self.value_optimizer.load_state_dict(state["value_optimizer"])
            self._episode_id = int(state["episode_id"])
            self.rng = restore_rng(state["rng"])
        except (KeyError, TypeError, ValueError) as e:
            raise PersistenceError(f"Corrupt SIL worker state: {e}") from e
