"""Oracle compression function: a grid overlay on agent position."""

from __future__ import annotations

import math

from .config import CompressionSpec
from .envs.gridworld import MOVES
from .envs.gridworld import GridState
from .envs.layouts import Cell
from .envs.layouts import Layout
from .errors import UsageError


def compress(position: Cell, spec: CompressionSpec, width: int) -> int:
    x, y = position
    if x < spec.origin_x or y < spec.origin_y:
        raise UsageError(f"Position {position} lies before the compression origin ({spec.origin_x}, {spec.origin_y})")
    n_cols = math.ceil((width - spec.origin_x) / spec.cell_width)
    return (x - spec.origin_x) // spec.cell_width + n_cols * ((y - spec.origin_y) // spec.cell_height)


class Compressor:
    """`compress` bound to a map width, callable on positions or states."""

    def __init__(self, spec: CompressionSpec, width: int) -> None:
        self.spec = spec
        self.width = width

    def __call__(self, position: Cell) -> int:
        return compress(position, self.spec, self.width)

    def region_of(self, state: GridState) -> int:
        return compress((state.x, state.y), self.spec, self.width)


def region_cells(layout: Layout, spec: CompressionSpec) -> dict[int, list[Cell]]:
    regions: dict[int, list[Cell]] = {}
    for cell in layout.passable_cells():
        regions.setdefault(compress(cell, spec, layout.width), []).append(cell)
    return regions


def adjacent_region_pairs(layout: Layout, spec: CompressionSpec) -> set[tuple[int, int]]:
    """Ordered region pairs joined by one primitive move between passable cells."""
    passable = set(layout.passable_cells())
    pairs = set()
    for x, y in passable:
        z = compress((x, y), spec, layout.width)
        for dx, dy in MOVES.values():
            neighbor = (x + dx, y + dy)
            if neighbor not in passable:
                continue
            other = compress(neighbor, spec, layout.width)
            if other != z:
                pairs.add((z, other))
    return pairs
