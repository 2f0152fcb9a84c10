from __future__ import annotations

from ..config import FLAT_AGENTS
from ..config import NO_TRANSFER_PREFIX
from ..config import CompressionSpec
from ..config import HRLAgentConfig
from ..config import RunConfig
from ..config import WorkerKind
from ..config import default_compression
from ..envs.gridworld import GridWorld
from ..errors import ConfigurationError
from .base import Agent
from .flat import FlatAgent
from .hrl import HRLAgent

# HRL is the no-controllability control of the hazard experiment; it is the same agent as HRL-TAB.
LABEL_ALIASES: dict[str, str] = {"HRL": "HRL-TAB"}


def hrl_config_for(label: str, config: RunConfig, layout: str) -> HRLAgentConfig:
    """HRL settings implied by an agent label, on top of the run's HRL section."""
    base = label.removeprefix(NO_TRANSFER_PREFIX)
    base = LABEL_ALIASES.get(base, base)
    worker: WorkerKind = "sil" if base == "HRL-SIL" else "tabular"
    if config.worker is not None:
        worker = config.worker
    option = config.hrl.option.model_copy(update={"controllability": base == "HRL-CO"})

    compression = config.hrl.compression
    if "compression" not in config.hrl.model_fields_set and layout in ("kdt1", "kdt2", "hazard"):
        compression = default_compression(layout)
    if config.region_size is not None:
        compression = CompressionSpec(cell_width=config.region_size, cell_height=config.region_size)
    return config.hrl.model_copy(update={"worker": worker, "option": option, "compression": compression})


def get_agent(label: str, env: GridWorld, config: RunConfig, seed: int) -> Agent:
    base = label.removeprefix(NO_TRANSFER_PREFIX)
    if base in FLAT_AGENTS:
        return FlatAgent(env, config.flat, seed=seed, label=label)
    if base.startswith("HRL"):
        layout = env.config.base_layout or env.config.layout
        return HRLAgent(
            env,
            hrl_config_for(label, config, layout),
            seed=seed,
            label=label,
            total_steps=config.total_steps,
            log_events=config.log_events,
        )
    raise ConfigurationError(f"Unknown agent: {label}")
