#!/usr/bin/env python3
"""
T-obstacles: square obstacles carrying a tiling and an onion-skin layer.

Each cell of a T-obstacle holds a state `tile/arrow`. The arrow points
toward the centre of the square, so a side-7 square reads

    ↘ ↓ ↓ ↓ ↓ ↓ ↙
    → ↘ ↓ ↓ ↓ ↙ ←
    → → ↘ ↓ ↙ ← ←
    → → → − ← ← ←
    → → ↗ ↑ ↖ ← ←
    → ↗ ↑ ↑ ↑ ↖ ←
    ↗ ↑ ↑ ↑ ↑ ↑ ↖

Even sides have a 2x2 block of `−` in the middle. A T-obstacle cell turns
to 0 when a neighbour on its inside is missing or incompatible, when an
outside neighbour is incompatible or a plain obstacle, or when its 5x5
window holds a disconnected T-obstacle cell or any plain obstacle. Invalid
T-obstacles therefore erode from the outside in.
"""

import logging
from typing import Dict, FrozenSet, Iterable, List, Tuple

from .compilers import CompiledCA, Provenance
from .grid import Alphabet, Configuration, Position, Window
from .rules import ObstacleRuleTable, f_automaton
from .sft import ARROWS, F_ALPHABET, OBSTACLE_STATES, ConstrainedLibrary, default_sigma_af
from .tiling import TileSet, Tiling, format_tileset

logger = logging.getLogger(__name__)

DASH = "−"
X_STATES = ARROWS + (DASH,)
ARROW_VECTORS = {
    "↓": (0, -1), "↑": (0, 1), "→": (1, 0), "←": (-1, 0),
    "↘": (1, -1), "↙": (-1, -1), "↗": (1, 1), "↖": (-1, 1), DASH: (0, 0),
}
ONION_SIDES = (7, 8)
MIN_SIDE = 3
ORTHOGONAL = ((1, 0), (-1, 0), (0, 1), (0, -1))


def onion(side: int) -> Dict[Position, str]:
    """Arrow of every cell (i, j) of a side x side square, j counted from the bottom."""
    cells = {}
    for i in range(side):
        for j in range(side):
            u, v = 2 * i - (side - 1), 2 * j - (side - 1)
            if max(abs(u), abs(v)) <= 1:
                arrow = DASH
            elif abs(u) == abs(v):
                arrow = {(True, True): "↙", (False, True): "↘",
                         (True, False): "↖", (False, False): "↗"}[(u > 0, v > 0)]
            elif abs(u) > abs(v):
                arrow = "←" if u > 0 else "→"
            else:
                arrow = "↓" if v > 0 else "↑"
            cells[(i, j)] = arrow
    return cells


def onion_patterns(sides: Iterable[int] = ONION_SIDES) -> FrozenSet[Tuple[str, str, str, str]]:
    """2x2 X-patterns (top-left, top-right, bottom-left, bottom-right) of the given onions."""
    found = set()
    for side in sides:
        cells = onion(side)
        for i in range(side - 1):
            for j in range(side - 1):
                found.add((cells[(i, j + 1)], cells[(i + 1, j + 1)], cells[(i, j)], cells[(i + 1, j)]))
    return frozenset(found)


def x_pairs(patterns: Iterable[Tuple[str, str, str, str]]) -> Tuple[FrozenSet[Tuple[str, str]], FrozenSet[Tuple[str, str]]]:
    """Horizontal (left, right) and vertical (bottom, top) pairs occurring in the patterns."""
    h, v = set(), set()
    for tl, tr, bl, br in patterns:
        h.update({(tl, tr), (bl, br)})
        v.update({(bl, tl), (br, tr)})
    return frozenset(h), frozenset(v)


def e_state(tile: str, arrow: str) -> str:
    return f"{tile}/{arrow}"


def split_e(state: str) -> Tuple[str, str]:
    tile, _, arrow = state.rpartition("/")
    return tile, arrow


def outside_offsets(arrow: str) -> FrozenSet[Position]:
    """Orthogonal neighbours lying outward, opposite the arrow."""
    ax, ay = ARROW_VECTORS[arrow]
    out = set()
    if ax:
        out.add((-ax, 0))
    if ay:
        out.add((0, -ay))
    return frozenset(out)


def _idx5(dx: int, dy: int) -> int:
    return (2 - dy) * 5 + dx + 2


class TObstacleRuleTable(ObstacleRuleTable):
    """F extended by T-obstacles over E = T x X."""

    def __init__(self, name: str, alphabet: Alphabet, library, tileset: TileSet,
                 violation_scope: str = "center-window", min_interior: int = 1):
        self.tileset = tileset
        self.e_states = frozenset(s for s in alphabet.states if "/" in s)
        self.xh, self.xv = x_pairs(onion_patterns())
        f = f_automaton()
        super().__init__(name, alphabet, library, OBSTACLE_STATES | self.e_states, f.rules,
                         violation_scope, min_interior)

    def pair_ok(self, a: str, b: str, offset: Position) -> bool:
        """Domino check for E states a at the centre and b at centre + offset."""
        if offset[0] < 0 or offset[1] < 0:
            a, b, offset = b, a, (-offset[0], -offset[1])
        ta, xa = split_e(a)
        tb, xb = split_e(b)
        if offset == (1, 0):
            return (ta, tb) in self.tileset.hpairs and (xa, xb) in self.xh
        return (ta, tb) in self.tileset.vpairs and (xa, xb) in self.xv

    def eroded(self, window: Window) -> bool:
        centre = window[12]
        e = self.e_states
        _, arrow = split_e(centre)
        outside = outside_offsets(arrow)
        for offset in ORTHOGONAL:
            other = window[_idx5(*offset)]
            if offset in outside:
                if other in OBSTACLE_STATES:
                    return True
                if other in e and not self.pair_ok(centre, other, offset):
                    return True
            elif other not in e or not self.pair_ok(centre, other, offset):
                return True
        if any(s in OBSTACLE_STATES for s in window):
            return True
        return not self._connected(window)

    def _connected(self, window: Window) -> bool:
        e = self.e_states
        cells = {(dx, dy) for dx in range(-2, 3) for dy in range(-2, 3) if window[_idx5(dx, dy)] in e}
        seen = {(0, 0)}
        stack = [(0, 0)]
        while stack:
            x, y = stack.pop()
            for dx, dy in ORTHOGONAL:
                q = (x + dx, y + dy)
                if q in cells and q not in seen:
                    seen.add(q)
                    stack.append(q)
        return seen == cells

    def _evaluate(self, window: Window) -> str:
        if window[12] in self.e_states and self.eroded(window):
            return self.quiescent
        return super()._evaluate(window)


def phi4(tileset: TileSet, violation_scope: str = "center-window", min_interior: int = 1) -> CompiledCA:
    """F plus T-obstacles over the tile set."""
    e_states = tuple(e_state(t, x) for t in tileset.tiles for x in X_STATES)
    obstacle = OBSTACLE_STATES | frozenset(e_states)
    alphabet = Alphabet(f"phi4-{tileset.name}", F_ALPHABET.states + e_states, "0",
                        classes=(("A", obstacle), ("particle", frozenset({"U", "D"}))))
    library = ConstrainedLibrary(f"phi4-{tileset.name}", default_sigma_af(min_interior),
                                 {s: "0" for s in e_states}, (), (), ())
    rt = TObstacleRuleTable(f"phi4-{tileset.name}", alphabet, library, tileset, violation_scope, min_interior)
    logger.info("compiled phi4 for %s: %d T-obstacle states", tileset.name, len(e_states))
    return CompiledCA(rt, library, Provenance("phi4", tileset.name, format_tileset(tileset)))


def t_obstacle_cells(tiling: Tiling, origin: Position = (0, 0)) -> Dict[Position, str]:
    """Cells of the square T-obstacle for a tiling given bottom row first."""
    side = len(tiling)
    if side < 1 or any(len(row) != side for row in tiling):
        raise ValueError("T-obstacles need a square tiling")
    skin = onion(side)
    ox, oy = origin
    return {(ox + i, oy + j): e_state(tiling[j][i], skin[(i, j)]) for i in range(side) for j in range(side)}


def t_obstacle(ca: CompiledCA, tiling: Tiling, origin: Position = (0, 0)) -> Configuration:
    return Configuration(ca.rule_table.alphabet, t_obstacle_cells(tiling, origin))


def e_support(x: Configuration) -> List[Position]:
    return sorted(p for p, s in x.items() if "/" in s)


def x_layer(x: Configuration) -> Dict[Position, str]:
    return {p: split_e(s)[1] for p, s in x.items() if "/" in s}
