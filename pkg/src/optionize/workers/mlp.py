"""Fully connected network with ReLU hidden layers, forward and backward in numpy."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..errors import UsageError

Params = dict[str, np.ndarray]


@dataclass
class MLPCache:
    inputs: list[np.ndarray]
    """Input of every layer; inputs[0] is the network input."""

    pre_activations: list[np.ndarray]


def init_mlp(sizes: Sequence[int], rng: np.random.Generator, output_scale: float = 0.01) -> Params:
    """He-initialised weights, zero biases, small output layer so initial policies are near uniform."""
    if len(sizes) < 2:
        raise UsageError(f"An MLP needs at least input and output sizes, got {list(sizes)}")
    params: Params = {}
    n_layers = len(sizes) - 1
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:], strict=True)):
        scale = output_scale if i == n_layers - 1 else np.sqrt(2.0 / fan_in)
        params[f"W{i}"] = rng.normal(0.0, scale, size=(fan_in, fan_out))
        params[f"b{i}"] = np.zeros(fan_out)
    return params


def n_layers(params: Params) -> int:
    return len(params) // 2


def input_dim(params: Params) -> int:
    return params["W0"].shape[0]


def mlp_forward(params: Params, x: np.ndarray) -> tuple[np.ndarray, MLPCache]:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[-1] != input_dim(params):
        raise UsageError(f"Input dimension {x.shape[-1]} does not match network input {input_dim(params)}")

    cache = MLPCache(inputs=[], pre_activations=[])
    h = x
    last = n_layers(params) - 1
    for i in range(last + 1):
        cache.inputs.append(h)
        z = h @ params[f"W{i}"] + params[f"b{i}"]
        cache.pre_activations.append(z)
        h = z if i == last else np.maximum(z, 0.0)
    return h, cache


def mlp_backward(params: Params, cache: MLPCache, grad_output: np.ndarray) -> Params:
    """Gradients of a scalar loss w.r.t. every parameter, given dLoss/dOutput."""
    grad = np.atleast_2d(np.asarray(grad_output, dtype=np.float64))
    if grad.shape != cache.pre_activations[-1].shape:
        raise UsageError(f"Output gradient shape {grad.shape} does not match {cache.pre_activations[-1].shape}")

    grads: Params = {}
    for i in reversed(range(n_layers(params))):
        if i != n_layers(params) - 1:
            grad = grad * (cache.pre_activations[i] > 0.0)
        grads[f"W{i}"] = cache.inputs[i].T @ grad
        grads[f"b{i}"] = grad.sum(axis=0)
        grad = grad @ params[f"W{i}"].T
    return grads


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def params_to_lists(params: Params) -> dict[str, list]:
    return {name: value.tolist() for name, value in sorted(params.items())}


def params_from_lists(data: dict[str, list]) -> Params:
    return {name: np.asarray(value, dtype=np.float64) for name, value in data.items()}
