"""ASCII maps.

Legend: `#` wall, `.` floor, `S` start, `K` key, `D` door, `T` treasure, `X` fatal cell.
Coordinates are (x=column, y=row) with y growing downwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigurationError
from ..utils import PathLike

Cell = tuple[int, int]

# Four 8x8 rooms. Doorways: (9,4) top-left/top-right, (4,9) top-left/bottom-left, (14,9) top-right/bottom-right.
# The map is symmetric about x=9, which keeps walls fixed under mirroring.
KDT1_MAP = """\
###################
#........#........#
#.S......#........#
#........#........#
#.................#
#........#........#
#.....K..#........#
#........#........#
#........#........#
####D#########.####
#........#........#
#........#........#
#........#........#
#........#........#
#...T....#........#
#........#........#
#........#........#
#........#........#
###################
"""

# Same rooms; the key sits in the bottom-left room while the door gates the bottom-right one.
KDT2_MAP = """\
###################
#........#........#
#.S......#........#
#........#........#
#.................#
#........#........#
#........#........#
#........#........#
#........#........#
####.#########D####
#........#........#
#........#........#
#........#........#
#........#........#
#..K.....#....T...#
#........#........#
#........#........#
#........#........#
###################
"""

# Three platforms joined by single-cell ladders; the rows between platforms are fatal.
HAZARD_MAP = """\
####################
#S.................#
#..................#
#..................#
#XXX.XXXXXXXXXXXXXX#
#XXX.XXXXXXXXXXXXXX#
#..................#
#..................#
#..................#
#XXXXXXXXXXXXXX.XXX#
#XXXXXXXXXXXXXX.XXX#
#..................#
#..................#
#K.................#
####################
"""

BUILTIN_MAPS: dict[str, str] = {
    "kdt1": KDT1_MAP,
    "kdt2": KDT2_MAP,
    "hazard": HAZARD_MAP,
}


@dataclass(frozen=True)
class Layout:
    name: str
    width: int
    height: int
    walls: frozenset[Cell]
    fatal: frozenset[Cell]
    start: Cell
    key: Cell | None = None
    door: Cell | None = None
    treasure: Cell | None = None

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_wall(self, x: int, y: int) -> bool:
        return not self.in_bounds(x, y) or (x, y) in self.walls

    def passable_cells(self) -> list[Cell]:
        return [(x, y) for y in range(self.height) for x in range(self.width) if (x, y) not in self.walls]

    def is_mirror_symmetric(self) -> bool:
        mirrored = {(self.width - 1 - x, y) for x, y in self.walls}
        return mirrored == set(self.walls) and {(self.width - 1 - x, y) for x, y in self.fatal} == set(self.fatal)


def parse_layout(text: str, name: str = "custom") -> Layout:
    rows = [row for row in text.splitlines() if row.strip()]
    if not rows:
        raise ConfigurationError(f"Layout {name} is empty")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ConfigurationError(f"Layout {name} has rows of different widths")

    walls: set[Cell] = set()
    fatal: set[Cell] = set()
    marks: dict[str, list[Cell]] = {"S": [], "K": [], "D": [], "T": []}
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            match ch:
                case "#":
                    walls.add((x, y))
                case "X":
                    fatal.add((x, y))
                case "S" | "K" | "D" | "T":
                    marks[ch].append((x, y))
                case ".":
                    pass
                case _:
                    raise ConfigurationError(f"Layout {name} has unknown cell {ch!r} at {(x, y)}")

    for mark, cells in marks.items():
        if len(cells) > 1:
            raise ConfigurationError(f"Layout {name} has {len(cells)} cells marked {mark!r}, expected at most one")
    if not marks["S"]:
        raise ConfigurationError(f"Layout {name} has no start cell")

    def first(mark: str) -> Cell | None:
        return marks[mark][0] if marks[mark] else None

    return Layout(
        name=name,
        width=width,
        height=len(rows),
        walls=frozenset(walls),
        fatal=frozenset(fatal),
        start=marks["S"][0],
        key=first("K"),
        door=first("D"),
        treasure=first("T"),
    )


def load_layout(f: PathLike) -> Layout:
    path = Path(f)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Failed to read layout file {path}: {e}") from e
    return parse_layout(text, name=path.stem)


def builtin_layout(name: str) -> Layout:
    if name not in BUILTIN_MAPS:
        raise ConfigurationError(f"Invalid layout id: {name}. Use one of {', '.join(BUILTIN_MAPS)}.")
    return parse_layout(BUILTIN_MAPS[name], name=name)
