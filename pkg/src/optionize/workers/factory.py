from __future__ import annotations

import numpy as np

from ..config import HRLAgentConfig
from ..config import WorkerKind
from ..errors import ConfigurationError
from .base import ObservationEncoder
from .base import Worker
from .sil import SILWorker
from .tabular import TabularWorker


def make_worker(
    kind: WorkerKind, config: HRLAgentConfig, encoder: ObservationEncoder, rng: np.random.Generator
) -> Worker:
    match kind:
        case "tabular":
            return TabularWorker(config.tabular, rng)
        case "sil":
            return SILWorker(config.sil, encoder, rng)
        case _:
            raise ConfigurationError(f"Invalid worker kind: {kind}. Use 'tabular' or 'sil'.")
