from __future__ import annotations

from typing import Any

import numpy as np

from ..config import OptimizerName
from ..errors import ConfigurationError
from .mlp import Params
from .mlp import params_from_lists
from .mlp import params_to_lists


class SGD:
    name = "sgd"

    def __init__(self, learning_rate: float) -> None:
        self.learning_rate = learning_rate

    def step(self, params: Params, grads: Params) -> None:
        for name, grad in grads.items():
            params[name] -= self.learning_rate * grad

    def state_dict(self) -> dict[str, Any]:
        return {"name": self.name, "learning_rate": self.learning_rate}

    def load_state_dict(self, state: dict[str, Any]) -> None:
        self.learning_rate = float(state["learning_rate"])


class Adam:
    name = "adam"

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: Params = {}
        self.v: Params = {}

    def step(self, params: Params, grads: Params) -> None:
        self.t += 1
        for name, grad in grads.items():
            m = self.m.setdefault(name, np.zeros_like(grad))
            v = self.v.setdefault(name, np.zeros_like(grad))
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            m_hat = m / (1.0 - self.beta1**self.t)
            v_hat = v / (1.0 - self.beta2**self.t)
            params[name] -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)

    def state_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "learning_rate": self.learning_rate,
            "t": self.t,
            "m": params_to_lists(self.m),
            "v": params_to_lists(self.v),
        }

    def load_state_dict(self, state: dict[str, Any]) -> None:
        self.learning_rate = float(state["learning_rate"])
        self.t = int(state["t"])
        self.m = params_from_lists(state["m"])
        self.v = params_from_lists(state["v"])


Optimizer = SGD | Adam


def make_optimizer(name: OptimizerName, learning_rate: float) -> Optimizer:
    match name:
        case "sgd":
            return SGD(learning_rate)
        case "adam":
            return Adam(learning_rate)
        case _:
            raise ConfigurationError(f"Invalid optimizer: {name}. Use 'sgd' or 'adam'.")
