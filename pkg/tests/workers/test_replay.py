import numpy as np
import pytest

from optionize.errors import UsageError
from optionize.workers import PrioritizedReplayBuffer
from optionize.workers import SumTree


def test_sum_tree_prefix_search() -> None:
    tree = SumTree(5)
    assert tree.capacity == 8
    for i, value in enumerate([1.0, 2.0, 3.0, 4.0]):
        tree[i] = value
    assert tree.total() == pytest.approx(10.0)
    np.testing.assert_array_equal(tree.find_prefixsum_idx(np.array([0.0, 0.5, 1.0, 2.9, 3.0, 9.9])), [0, 0, 1, 1, 2, 3])


def test_priority_floor() -> None:
    buffer = PrioritizedReplayBuffer(4, 2, alpha=0.6, floor=1e-5)
    assert buffer.priority_of(-1.0) == pytest.approx(1e-5**0.6)
    assert buffer.priority_of(0.0) == pytest.approx(1e-5**0.6)
    assert buffer.priority_of(2.0) == pytest.approx(2.0**0.6)


def test_fifo_eviction() -> None:
    buffer = PrioritizedReplayBuffer(3, 1)
    for i in range(5):
        buffer.add(np.array([float(i)]), 0, float(i), 1.0)
    assert len(buffer) == 3
    assert sorted(buffer.returns.tolist()) == [2.0, 3.0, 4.0]


def test_sampling_follows_priorities() -> None:
    buffer = PrioritizedReplayBuffer(4, 1, alpha=1.0)
    for i, advantage in enumerate([1.0, 2.0, 3.0, 4.0]):
        buffer.add(np.array([float(i)]), 0, 0.0, advantage)
    sample = buffer.sample(100_000, np.random.default_rng(0))
    frequencies = np.bincount(sample.indices, minlength=4) / 100_000
    np.testing.assert_allclose(frequencies, [0.1, 0.2, 0.3, 0.4], atol=0.01)


def test_importance_weights() -> None:
    buffer = PrioritizedReplayBuffer(4, 1, alpha=1.0, beta=0.4)
    for i, advantage in enumerate([1.0, 2.0, 3.0, 4.0]):
        buffer.add(np.array([float(i)]), 0, 0.0, advantage)
    sample = buffer.sample(1000, np.random.default_rng(0))
    assert sample.weights.max() <= 1.0
    np.testing.assert_allclose(sample.weights[sample.indices == 0], 1.0)
    np.testing.assert_allclose(sample.weights[sample.indices == 3], (0.4 * 4) ** -0.4 / (0.1 * 4) ** -0.4)


def test_empty_sample_raises() -> None:
    with pytest.raises(UsageError):
        PrioritizedReplayBuffer(4, 1).sample(2, np.random.default_rng(0))


def test_update_priorities() -> None:
    buffer = PrioritizedReplayBuffer(4, 1, alpha=1.0)
    buffer.add(np.zeros(1), 0, 0.0, 1.0)
    buffer.add(np.zeros(1), 0, 0.0, 1.0)
    buffer.update_priorities(np.array([1]), np.array([3.0]))
    np.testing.assert_allclose(buffer.priorities(), [1.0, 3.0])


def test_amend_episode() -> None:
    buffer = PrioritizedReplayBuffer(8, 1)
    for offset in (2, 1, 0):
        buffer.add(np.zeros(1), 0, 1.0, 1.0, episode=7, offset=offset)
    buffer.add(np.zeros(1), 0, 1.0, 1.0, episode=8, offset=0)
    assert buffer.amend_episode(7, 1.0, 0.5) == 3
    np.testing.assert_allclose(buffer.returns[:4], [1.25, 1.5, 2.0, 1.0])
    assert buffer.amend_episode(9, 1.0, 0.5) == 0


def test_clear() -> None:
    buffer = PrioritizedReplayBuffer(4, 1)
    buffer.add(np.zeros(1), 0, 0.0, 1.0, episode=1)
    buffer.clear()
    assert len(buffer) == 0
    assert buffer.amend_episode(1, 1.0, 0.9) == 0
