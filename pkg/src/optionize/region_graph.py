"""The agent's estimate of the task-independent SMDP: regions, neighbor edges and their options."""

from __future__ import annotations

import hashlib
import json
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any
from typing import Literal

from loguru import logger
from pydantic import BaseModel
from pydantic import ValidationError

from .config import CompressionSpec
from .errors import PersistenceError
from .errors import UsageError
from .options import Edge
from .options import OptionSpec
from .utils import PathLike
from .utils import load_json
from .utils import save_json
from .workers.base import Worker

FORMAT_VERSION = 1

WorkerFactory = Callable[[OptionSpec], Worker]


@dataclass
class EdgeStats:
    attempts: int = 0
    successes: int = 0

    @property
    def success_rate(self) -> float | None:
        """Empirical P(z'|z, o_{z,z'}); None before the first attempt."""
        if self.attempts == 0:
            return None
        return self.successes / self.attempts


class EdgeDocument(BaseModel):
    source: int
    target: int
    attempts: int = 0
    successes: int = 0
    worker: dict[str, Any]


class GraphDocument(BaseModel):
    format_version: Literal[1] = FORMAT_VERSION
    compression: CompressionSpec
    step_limit: int
    regions: list[int]
    edges: list[EdgeDocument]


class RegionGraph:
    """Discovered regions Z, observed neighbor edges and the option owned by each.

    Every region owns one exploration option and every edge (z, z') one navigate option whose
    worker is built by `make_worker`. Regions and edges only ever grow.
    """

    def __init__(self, compression: CompressionSpec, make_worker: WorkerFactory, step_limit: int = 100) -> None:
        self.compression = compression
        self.make_worker = make_worker
        self.step_limit = step_limit
        self.regions: set[int] = set()
        self.explore_options: dict[int, OptionSpec] = {}
        self.navigate_options: dict[Edge, OptionSpec] = {}
        self.edge_stats: dict[Edge, EdgeStats] = {}

    @property
    def edges(self) -> set[Edge]:
        return set(self.navigate_options)

    def __contains__(self, region: int) -> bool:
        return region in self.regions

    def add_region(self, region: int) -> bool:
        if region in self.regions:
            return False
        self.regions.add(region)
        self.explore_options[region] = OptionSpec.explore(region)
        logger.debug(f"Discovered region {region}")
        return True

    def observe_transition(self, region: int, next_region: int) -> tuple[bool, bool]:
        """Record a primitive move from `region` into `next_region`. Returns (new_region, new_edge)."""
        if region not in self.regions:
            raise UsageError(f"Region {region} is not registered")
        if region == next_region:
            raise UsageError(f"Transition from region {region} to itself is not a region change")

        new_region = self.add_region(next_region)
        edge = (region, next_region)
        if edge in self.navigate_options:
            return new_region, False
        option = OptionSpec.navigate(region, next_region, self.step_limit)
        option.worker = self.make_worker(option)
        self.navigate_options[edge] = option
        self.edge_stats[edge] = EdgeStats()
        logger.debug(f"Discovered edge {region} -> {next_region}")
        return new_region, True

    def record_option_outcome(self, edge: Edge, success: bool) -> float:
        if edge not in self.edge_stats:
            raise UsageError(f"Edge {edge} is not registered")
        stats = self.edge_stats[edge]
        stats.attempts += 1
        stats.successes += int(success)
        assert stats.success_rate is not None
        return stats.success_rate

    def success_rate(self, edge: Edge) -> float | None:
        if edge not in self.edge_stats:
            raise UsageError(f"Edge {edge} is not registered")
        return self.edge_stats[edge].success_rate

    def neighbors(self, region: int) -> list[int]:
        return sorted(target for source, target in self.navigate_options if source == region)

    def explore_option(self, region: int) -> OptionSpec:
        if region not in self.regions:
            raise UsageError(f"Region {region} is not registered")
        return self.explore_options[region]

    def navigate_option(self, edge: Edge) -> OptionSpec | None:
        return self.navigate_options.get(edge)

    def options_for(self, region: int) -> list[OptionSpec]:
        """Navigate options that start in `region`, ordered by target."""
        return [self.navigate_options[(region, target)] for target in self.neighbors(region)]

    def mean_success_rate(self) -> float:
        rates = [rate for stats in self.edge_stats.values() if (rate := stats.success_rate) is not None]
        return sum(rates) / len(rates) if rates else 0.0

    def document(self) -> GraphDocument:
        edges = []
        for edge in sorted(self.navigate_options):
            worker = self.navigate_options[edge].worker
            assert worker is not None
            stats = self.edge_stats[edge]
            edges.append(
                EdgeDocument(
                    source=edge[0],
                    target=edge[1],
                    attempts=stats.attempts,
                    successes=stats.successes,
                    worker=worker.state_dict(),
                )
            )
        return GraphDocument(
            compression=self.compression,
            step_limit=self.step_limit,
            regions=sorted(self.regions),
            edges=edges,
        )

    def fingerprint(self) -> str:
        canonical = json.dumps(self.document().model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RegionGraph):
            return NotImplemented
        return self.document() == other.document()

    def save(self, f: PathLike) -> None:
        try:
            save_json(self.document().model_dump(mode="json"), f)
        except (OSError, ValueError) as e:
            logger.error(f"Failed to save region graph to {f}: {e}")
            raise PersistenceError(f"Failed to save region graph to {f}: {e}") from e

    @classmethod
    def from_document(cls, document: GraphDocument, make_worker: WorkerFactory) -> RegionGraph:
        graph = cls(document.compression, make_worker, step_limit=document.step_limit)
        for region in document.regions:
            graph.add_region(region)
        for entry in document.edges:
            if entry.source not in graph.regions or entry.target not in graph.regions:
                raise PersistenceError(f"Edge {entry.source} -> {entry.target} references an unknown region")
            if entry.successes > entry.attempts:
                raise PersistenceError(f"Edge {entry.source} -> {entry.target} has more successes than attempts")
            graph.observe_transition(entry.source, entry.target)
            edge = (entry.source, entry.target)
            worker = graph.navigate_options[edge].worker
            assert worker is not None
            worker.load_state_dict(entry.worker)
            graph.edge_stats[edge] = EdgeStats(attempts=entry.attempts, successes=entry.successes)
        return graph

    @classmethod
    def load(cls, f: PathLike, make_worker: WorkerFactory) -> RegionGraph:
        try:
            data = load_json(f)
        except (OSError, ValueError) as e:
            raise PersistenceError(f"Failed to read region graph {f}: {e}") from e
        try:
            document = GraphDocument.model_validate(data)
        except ValidationError as e:
            raise PersistenceError(f"Invalid region graph file {f}: {e}") from e
        return cls.from_document(document, make_worker)

    def to_dot(self) -> str:
        lines = ["digraph regions {"]
        for region in sorted(self.regions):
            lines.append(f'  z{region} [label="{region}"];')
        for source, target in sorted(self.navigate_options):
            stats = self.edge_stats[(source, target)]
            label = f"{stats.successes}/{stats.attempts}"
            lines.append(f'  z{source} -> z{target} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"
