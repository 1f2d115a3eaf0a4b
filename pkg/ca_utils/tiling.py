#!/usr/bin/env python3
"""
Wang tile sets in domino form and bounded tiling search.

A tiling is a list of rows, bottom row first; each row lists tile names
left to right. `h: a b` allows b directly right of a, `v: a b` allows b
directly above a.

Text format `tiles v1`:

    tiles v1
    name: checker
    tiles: a b
    h: a b
    h: b a
    v: a b
    v: b a
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

from .errors import FormatError, TilingError

logger = logging.getLogger(__name__)

TILES_MAGIC = "tiles v1"
FORBIDDEN_NAME_CHARS = set(" \t|")

Tiling = List[List[str]]


@dataclass(frozen=True)
class TileSet:
    """Finite tile set with allowed horizontal (left, right) and vertical (bottom, top) pairs."""

    name: str
    tiles: Tuple[str, ...]
    hpairs: FrozenSet[Tuple[str, str]]
    vpairs: FrozenSet[Tuple[str, str]]

    def __post_init__(self):
        if not self.tiles:
            raise TilingError(f"tile set {self.name} is empty")
        if len(set(self.tiles)) != len(self.tiles):
            raise TilingError(f"tile set {self.name} has duplicate tiles")
        for t in self.tiles:
            if not t or FORBIDDEN_NAME_CHARS & set(t):
                raise TilingError(f"bad tile name {t!r}")
        known = set(self.tiles)
        for kind, pairs in (("h", self.hpairs), ("v", self.vpairs)):
            for a, b in pairs:
                if a not in known or b not in known:
                    raise TilingError(f"{kind}-pair ({a}, {b}) references an unknown tile")
        object.__setattr__(self, "_right_of", _index(self.tiles, self.hpairs))
        object.__setattr__(self, "_above", _index(self.tiles, self.vpairs))

    def right_of(self, tile: str) -> Tuple[str, ...]:
        return self._right_of[tile]

    def above(self, tile: str) -> Tuple[str, ...]:
        return self._above[tile]


def _index(tiles: Sequence[str], pairs: Iterable[Tuple[str, str]]) -> Dict[str, Tuple[str, ...]]:
    order = {t: i for i, t in enumerate(tiles)}
    out: Dict[str, List[str]] = {t: [] for t in tiles}
    for a, b in pairs:
        out[a].append(b)
    return {t: tuple(sorted(v, key=order.__getitem__)) for t, v in out.items()}


class TilingResult(NamedTuple):
    tilable: bool
    witness: Optional[Tiling]


def check_tiling(tileset: TileSet, rows: Tiling) -> bool:
    """True iff every domino of the rectangle is allowed."""
    for r, row in enumerate(rows):
        for c, tile in enumerate(row):
            if tile not in tileset.tiles:
                return False
            if c > 0 and (row[c - 1], tile) not in tileset.hpairs:
                return False
            if r > 0 and (rows[r - 1][c], tile) not in tileset.vpairs:
                return False
    return True


def search_tiling(tileset: TileSet, width: int, height: int,
                  bottom: Optional[Sequence[str]] = None,
                  left_edge: Optional[FrozenSet[str]] = None,
                  right_edge: Optional[FrozenSet[str]] = None,
                  banned: Iterable[str] = ()) -> Optional[Tiling]:
    """Backtracking search, cells in row-major order from the bottom-left.

    Candidates are tried in tile-set order, so the witness returned is the
    first one in that order. `bottom` fixes the bottom row.
    """
    if width < 1 or height < 1:
        raise TilingError("tiling dimensions must be positive")
    banned = frozenset(banned)
    order = [t for t in tileset.tiles if t not in banned]
    cells = width * height
    grid: List[Optional[str]] = [None] * cells
    start = 0
    if bottom is not None:
        if len(bottom) != width:
            raise TilingError("fixed bottom row has the wrong width")
        grid[:width] = list(bottom)
        if not check_tiling(tileset, [list(bottom)]) or banned & set(bottom):
            return None
        start = width
        if height == 1:
            return [list(bottom)]

    def candidates(i: int) -> List[str]:
        r, c = divmod(i, width)
        if c > 0:
            options = tileset.right_of(grid[i - 1])
        else:
            options = order
        if r > 0:
            allowed = set(tileset.above(grid[i - width]))
            options = [t for t in options if t in allowed]
        options = [t for t in options if t not in banned]
        if c == 0 and left_edge is not None:
            options = [t for t in options if t in left_edge]
        if c == width - 1 and right_edge is not None:
            options = [t for t in options if t in right_edge]
        return options

    stack = [(start, candidates(start), 0)]
    while stack:
        i, options, k = stack.pop()
        if k >= len(options):
            grid[i] = None
            continue
        grid[i] = options[k]
        stack.append((i, options, k + 1))
        if i + 1 == cells:
            return [grid[r * width:(r + 1) * width] for r in range(height)]
        stack.append((i + 1, candidates(i + 1), 0))
    return None


def tiles_square(tileset: TileSet, n: int) -> TilingResult:
    """Decide whether the n x n square can be tiled (free boundary)."""
    if n < 1:
        raise TilingError("n must be at least 1")
    witness = search_tiling(tileset, n, n)
    logger.debug("%s: %dx%d %s", tileset.name, n, n, "tilable" if witness else "untilable")
    return TilingResult(witness is not None, witness)


def greedy_tiling(tileset: TileSet, width: int, height: int) -> Tiling:
    """Deterministic best-effort filling; may violate constraints.

    Each cell takes the first tile fitting both its left and lower
    neighbours, else the lower one, else the left one, else the first tile.
    """
    rows: Tiling = []
    for r in range(height):
        row: List[str] = []
        for c in range(width):
            left = row[c - 1] if c > 0 else None
            below = rows[r - 1][c] if r > 0 else None
            fits_left = set(tileset.right_of(left)) if left else set(tileset.tiles)
            fits_below = set(tileset.above(below)) if below else set(tileset.tiles)
            choice = None
            for pool in (fits_left & fits_below, fits_below, fits_left):
                choice = next((t for t in tileset.tiles if t in pool), None)
                if choice is not None:
                    break
            row.append(choice or tileset.tiles[0])
        rows.append(row)
    return rows


def parse_tileset(text: str) -> TileSet:
    """Parse `tiles v1` text."""
    lines = text.split("\n")
    if not lines or lines[0].strip() != TILES_MAGIC:
        raise FormatError(f"missing '{TILES_MAGIC}' header", line=1, column=1)
    name = "tiles"
    tiles: Optional[Tuple[str, ...]] = None
    hpairs: Set[Tuple[str, str]] = set()
    vpairs: Set[Tuple[str, str]] = set()
    for i, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise FormatError("expected 'key: value'", line=i, column=1)
        key, value = (part.strip() for part in line.split(":", 1))
        if key == "name":
            name = value
        elif key == "tiles":
            tiles = tuple(value.split())
        elif key in ("h", "v"):
            pair = value.split()
            if len(pair) != 2:
                raise FormatError(f"{key}-pair needs two tiles", line=i, column=len(key) + 3)
            (hpairs if key == "h" else vpairs).add((pair[0], pair[1]))
        else:
            raise FormatError(f"unknown key {key!r}", line=i, column=1)
    if tiles is None:
        raise FormatError("missing 'tiles:' line")
    try:
        return TileSet(name, tiles, frozenset(hpairs), frozenset(vpairs))
    except TilingError as e:
        raise FormatError(str(e))


def format_tileset(tileset: TileSet) -> str:
    order = {t: i for i, t in enumerate(tileset.tiles)}
    key = lambda p: (order[p[0]], order[p[1]])
    lines = [TILES_MAGIC, f"name: {tileset.name}", f"tiles: {' '.join(tileset.tiles)}"]
    lines += [f"h: {a} {b}" for a, b in sorted(tileset.hpairs, key=key)]
    lines += [f"v: {a} {b}" for a, b in sorted(tileset.vpairs, key=key)]
    return "\n".join(lines) + "\n"


def load_tileset(path: str) -> TileSet:
    with open(path, "r", encoding="utf-8") as f:
        return parse_tileset(f.read())


def single_tile_set(name: str = "one") -> TileSet:
    """One tile, every domino allowed."""
    return TileSet(name, ("t",), frozenset({("t", "t")}), frozenset({("t", "t")}))


def counter_tile_set(size: int = 4) -> TileSet:
    """Tiles c{i}{j} counting columns and rows; tilable exactly up to size x size."""
    tiles = tuple(f"c{i}{j}" for j in range(size) for i in range(size))
    hpairs = {(f"c{i}{j}", f"c{i + 1}{j}") for i in range(size - 1) for j in range(size)}
    vpairs = {(f"c{i}{j}", f"c{i}{j + 1}") for i in range(size) for j in range(size - 1)}
    return TileSet(f"counter{size}", tiles, frozenset(hpairs), frozenset(vpairs))
