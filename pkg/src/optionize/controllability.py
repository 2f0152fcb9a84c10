"""Deferred controllability bonus.

A successful navigate option out of region z earns rho(z) = N/M on its final transition, where N
counts successes among the next M option completions. The bonus is only known M options later, so
each success leaves a pending record that matures once its window is full.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from loguru import logger

from .options import Edge
from .options import OptionOutcome
from .workers.base import Worker


@dataclass
class PendingRecord:
    option_id: str
    edge: Edge
    worker: Worker | None
    ticket: Any
    remaining: int
    successes: int = 0
    observed: int = 0


@dataclass(frozen=True)
class BonusAssignment:
    option_id: str
    edge: Edge
    rho: float
    observed: int
    worker: Worker | None
    ticket: Any

    def deliver(self) -> None:
        if self.worker is not None:
            self.worker.apply_bonus(self.ticket, self.rho)


class ControllabilityTracker:
    def __init__(self, horizon: int = 10) -> None:
        self.horizon = horizon
        self.pending: list[PendingRecord] = []

    def __len__(self) -> int:
        return len(self.pending)

    def update(
        self,
        success: bool,
        edge: Edge | None = None,
        option_id: str = "",
        worker: Worker | None = None,
        ticket: Any = None,
    ) -> list[BonusAssignment]:
        """Count one completed option towards every open window, then open a window if it was a
        successful navigate option. Returns the windows that filled up."""
        matured = []
        still_pending = []
        for record in self.pending:
            record.remaining -= 1
            record.observed += 1
            record.successes += int(success)
            if record.remaining == 0:
                matured.append(self._mature(record, self.horizon))
            else:
                still_pending.append(record)
        self.pending = still_pending

        if success and edge is not None:
            self.pending.append(PendingRecord(option_id, edge, worker, ticket, remaining=self.horizon))
        return matured

    def update_outcome(self, outcome: OptionOutcome) -> list[BonusAssignment]:
        option = outcome.option
        return self.update(outcome.success, option.edge, option.option_id, option.worker, outcome.ticket)

    def flush(self) -> list[BonusAssignment]:
        """Mature every open window over the options it has seen so far (rho = 0 if none)."""
        matured = [self._mature(record, record.observed) for record in self.pending]
        if matured:
            logger.debug(f"Flushed {len(matured)} partial controllability windows")
        self.pending = []
        return matured

    @staticmethod
    def _mature(record: PendingRecord, denominator: int) -> BonusAssignment:
        rho = record.successes / denominator if denominator > 0 else 0.0
        return BonusAssignment(record.option_id, record.edge, rho, record.observed, record.worker, record.ticket)


def controllability_update(
    tracker: ControllabilityTracker,
    edge: Edge | None,
    success: bool,
) -> list[BonusAssignment]:
    return tracker.update(success, edge)
