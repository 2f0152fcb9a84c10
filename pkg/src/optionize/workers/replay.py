"""Proportional prioritized replay for self-imitation.

Entries are (observation, action, return). Each entry also remembers the option episode it came
from and its distance to that episode's last step, so a delayed bonus on the final transition can
be folded into the stored returns afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UsageError


class SumTree:
    """Binary sum tree over a power-of-two number of leaves; root at index 1."""

    def __init__(self, size: int) -> None:
        capacity = 1
        while capacity < size:
            capacity *= 2
        self.capacity = capacity
        self._tree = np.zeros(2 * capacity)

    def __getitem__(self, idx: int) -> float:
        return float(self._tree[self.capacity + idx])

    def __setitem__(self, idx: int, value: float) -> None:
        node = self.capacity + idx
        self._tree[node] = value
        node //= 2
        while node >= 1:
            self._tree[node] = self._tree[2 * node] + self._tree[2 * node + 1]
            node //= 2

    def total(self) -> float:
        return float(self._tree[1])

    def leaves(self, n: int) -> np.ndarray:
        return self._tree[self.capacity : self.capacity + n]

    def find_prefixsum_idx(self, mass: np.ndarray) -> np.ndarray:
        """Vectorised descent: leaf index i with sum(p[:i]) <= mass < sum(p[:i+1])."""
        mass = np.array(mass, dtype=np.float64)
        idx = np.ones(mass.shape, dtype=np.int64)
        while idx[0] < self.capacity:
            left = 2 * idx
            left_sum = self._tree[left]
            go_right = mass >= left_sum
            mass = np.where(go_right, mass - left_sum, mass)
            idx = np.where(go_right, left + 1, left)
        return idx - self.capacity


@dataclass(frozen=True)
class ReplaySample:
    indices: np.ndarray
    obs: np.ndarray
    actions: np.ndarray
    returns: np.ndarray
    weights: np.ndarray


class PrioritizedReplayBuffer:
    def __init__(
        self,
        capacity: int,
        obs_dim: int,
        alpha: float = 0.6,
        beta: float = 0.4,
        floor: float = 1e-5,
    ) -> None:
        self.capacity = capacity
        self.alpha = alpha
        self.beta = beta
        self.floor = floor
        self.obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.returns = np.zeros(capacity)
        self.episodes = np.full(capacity, -1, dtype=np.int64)
        self.offsets = np.zeros(capacity, dtype=np.int64)
        self._tree = SumTree(capacity)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def priority_of(self, advantage: float) -> float:
        return max(advantage, self.floor) ** self.alpha

    def priorities(self) -> np.ndarray:
        return self._tree.leaves(self._size).copy()

    def add(
        self, obs: np.ndarray, action: int, ret: float, advantage: float, episode: int = -1, offset: int = 0
    ) -> int:
        idx = self._next
        self.obs[idx] = obs
        self.actions[idx] = action
        self.returns[idx] = ret
        self.episodes[idx] = episode
        self.offsets[idx] = offset
        self._tree[idx] = self.priority_of(advantage)
        self._next = (self._next + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)
        return idx

    def sample(self, batch_size: int, rng: np.random.Generator) -> ReplaySample:
        if self._size == 0:
            raise UsageError("Cannot sample from an empty replay buffer")
        total = self._tree.total()
        mass = rng.random(batch_size) * total
        indices = np.minimum(self._tree.find_prefixsum_idx(mass), self._size - 1)

        probabilities = self._tree.leaves(self._size)[indices] / total
        min_probability = self._tree.leaves(self._size).min() / total
        max_weight = (min_probability * self._size) ** (-self.beta)
        weights = (probabilities * self._size) ** (-self.beta) / max_weight
        return ReplaySample(
            indices=indices,
            obs=self.obs[indices],
            actions=self.actions[indices],
            returns=self.returns[indices],
            weights=weights,
        )

    def update_priorities(self, indices: np.ndarray, advantages: np.ndarray) -> None:
        for idx, advantage in zip(indices, advantages, strict=True):
            self._tree[int(idx)] = self.priority_of(float(advantage))

    def amend_episode(self, episode: int, bonus: float, gamma: float) -> int:
        """Add gamma^offset * bonus to every stored return of `episode`. Returns the amended count."""
        (indices,) = np.nonzero(self.episodes[: self._size] == episode)
        self.returns[indices] += bonus * gamma ** self.offsets[indices]
        return len(indices)

    def clear(self) -> None:
        self.episodes[:] = -1
        self._tree = SumTree(self.capacity)
        self._next = 0
        self._size = 0
