#!/usr/bin/env python3
"""
Pattern libraries, the obstacle subshift and obstacle decomposition.

A PatternLibrary presents a subshift of finite type by its allowed window
patterns. sigma_af() generates the 3x3 library of admissible obstacle
fields from single well-formed obstacles:

    ↘ ↓ ↓ ↙
    → 1 1 ←
    ↗ ↑ ↑ ↖

Everything outside an obstacle is free space (0, U or D), written `*`.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .errors import LibraryError, ObstacleError
from .grid import (Alphabet, Configuration, Pattern, Position, Wildcard, Window, extract,
                   window_at)

logger = logging.getLogger(__name__)

ARROWS = ("↓", "↑", "←", "→", "↙", "↘", "↖", "↗")
OBSTACLE_STATES = frozenset(("1",) + ARROWS)
FREE_STATES = frozenset(("0", "U", "D"))
PARTICLE_STATES = frozenset(("U", "D"))

F_ALPHABET = Alphabet(
    name="F",
    states=("U", "D", "0", "1") + ARROWS,
    quiescent="0",
    classes=(("A", OBSTACLE_STATES), ("*", FREE_STATES), ("particle", PARTICLE_STATES)),
)

STAR = Wildcard("*", FREE_STATES)

SIGMA_AF_BOUND = 4


def border_state(dx: int, dy: int, w: int, h: int) -> Optional[str]:
    """Footprint state at (dx, dy) relative to the interior's lower-left cell; None inside."""
    left, right, bottom, top = dx == -1, dx == w, dy == -1, dy == h
    if top:
        return "↘" if left else "↙" if right else "↓"
    if bottom:
        return "↗" if left else "↖" if right else "↑"
    if left:
        return "→"
    if right:
        return "←"
    return None


Fill = Union[str, Mapping[Position, str], Callable[[int, int], str]]


def obstacle_cells(origin: Position, w: int, h: int, fill: Fill = "1") -> Dict[Position, str]:
    """Cells of one framed obstacle; fill gives interior states by (dx, dy)."""
    if w < 1 or h < 1:
        raise ValueError("obstacle interior must be at least 1x1")
    ox, oy = origin
    cells = {}
    for dx in range(-1, w + 1):
        for dy in range(-1, h + 1):
            state = border_state(dx, dy, w, h)
            if state is None:
                if isinstance(fill, str):
                    state = fill
                elif callable(fill):
                    state = fill(dx, dy)
                else:
                    state = fill[(dx, dy)]
            cells[(ox + dx, oy + dy)] = state
    return cells


@dataclass(frozen=True)
class Obstacle:
    """A framed rectangle: interior plus a one-cell arrow border."""

    interior_origin: Position
    interior_w: int
    interior_h: int
    kind: str = "plain"

    @property
    def footprint(self) -> Tuple[int, int, int, int]:
        """(L, B, R, T) of the full footprint, inclusive."""
        x0, y0 = self.interior_origin
        return (x0 - 1, y0 - 1, x0 + self.interior_w, y0 + self.interior_h)

    @property
    def half_perimeter(self) -> int:
        return self.interior_w + self.interior_h + 4

    def contains(self, p: Position) -> bool:
        left, bottom, right, top = self.footprint
        return left <= p[0] <= right and bottom <= p[1] <= top

    def distance_to(self, other: "Obstacle") -> int:
        """Chebyshev distance between the two footprints."""
        l1, b1, r1, t1 = self.footprint
        l2, b2, r2, t2 = other.footprint
        gx = max(l2 - r1, l1 - r2, 0)
        gy = max(b2 - t1, b1 - t2, 0)
        return max(gx, gy)


class PatternLibrary:
    """Allowed window patterns of a subshift of finite type."""

    def __init__(self, name: str, window_w: int, window_h: int, allowed: Iterable[Pattern]):
        self.name = name
        self.window_w = window_w
        self.window_h = window_h
        self.allowed = frozenset(allowed)
        for p in self.allowed:
            if (p.width, p.height) != (window_w, window_h):
                raise LibraryError(f"pattern {p.width}x{p.height} in {window_w}x{window_h} library {name}")
        self._build_index()

    def _build_index(self):
        wildcards = {c for p in self.allowed for c in p.cells if isinstance(c, Wildcard)}
        concrete = {c for p in self.allowed for c in p.cells if isinstance(c, str)}
        classify: Dict[str, str] = {}
        indexable = True
        for wc in wildcards:
            for state in wc.states:
                if state in classify or state in concrete:
                    indexable = False
                classify[state] = wc.name
        self._classify = classify if indexable else None
        if indexable:
            self._signatures = frozenset(
                tuple(c.name if isinstance(c, Wildcard) else c for c in p.cells) for p in self.allowed)
        else:
            logger.debug("library %s falls back to scanning", self.name)

    def contains(self, window: Window) -> bool:
        """True iff the concrete window (row-major, top first) matches an allowed pattern."""
        if self._classify is not None:
            classify = self._classify
            return tuple(classify.get(s, s) for s in window) in self._signatures
        return any(_cells_admit(p.cells, window) for p in self.allowed)

    def matches(self, pattern: Pattern) -> bool:
        return self.contains(pattern.cells)

    def __len__(self) -> int:
        return len(self.allowed)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PatternLibrary):
            return NotImplemented
        return (self.window_w, self.window_h, self.allowed) == (other.window_w, other.window_h, other.allowed)

    def __hash__(self) -> int:
        return hash((self.window_w, self.window_h, self.allowed))


def _cells_admit(cells: Sequence, window: Window) -> bool:
    for c, s in zip(cells, window):
        if isinstance(c, Wildcard):
            if s not in c.states:
                return False
        elif c != s:
            return False
    return True


class WindowRule(NamedTuple):
    """Named predicate over a 3x3 window; False means the window is forbidden."""

    name: str
    check: Callable[[Window], bool]


# 3x3 indices, row-major from the top
_H_PAIRS = tuple((r * 3 + c, r * 3 + c + 1) for r in range(3) for c in range(2))
_V_PAIRS = tuple(((r + 1) * 3 + c, r * 3 + c) for r in range(2) for c in range(3))


class ConstrainedLibrary(PatternLibrary):
    """Obstacle library of a compiled CA.

    A window is allowed when its projection (interior states to `1`, extra
    free-space states to `0`) is in the skeleton library, every domino that
    touches a constrained state is an allowed pair, and every window rule
    holds.
    """

    _CACHE_LIMIT = 1 << 18

    def __init__(self, name: str, skeleton: PatternLibrary, projection: Mapping[str, str],
                 constrained: Iterable[str], hpairs: Iterable[Tuple[str, str]],
                 vpairs: Iterable[Tuple[str, str]], window_rules: Sequence[WindowRule] = ()):
        if (skeleton.window_w, skeleton.window_h) != (3, 3):
            raise LibraryError("constrained libraries need a 3x3 skeleton")
        self.skeleton = skeleton
        self.projection = dict(projection)
        self.constrained = frozenset(constrained)
        self.hpairs = frozenset(hpairs)
        self.vpairs = frozenset(vpairs)
        self.window_rules = tuple(window_rules)
        self._cache: Dict[Window, bool] = {}
        super().__init__(name, 3, 3, skeleton.allowed)

    def contains(self, window: Window) -> bool:
        cached = self._cache.get(window)
        if cached is None:
            cached = self._check(window)
            if len(self._cache) >= self._CACHE_LIMIT:
                self._cache.clear()
            self._cache[window] = cached
        return cached

    def _check(self, window: Window) -> bool:
        projection = self.projection
        if not self.skeleton.contains(tuple(projection.get(s, s) for s in window)):
            return False
        constrained = self.constrained
        for i, j in _H_PAIRS:
            a, b = window[i], window[j]
            if (a in constrained or b in constrained) and (a, b) not in self.hpairs:
                return False
        for i, j in _V_PAIRS:
            a, b = window[i], window[j]
            if (a in constrained or b in constrained) and (a, b) not in self.vpairs:
                return False
        return all(rule.check(window) for rule in self.window_rules)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConstrainedLibrary):
            return NotImplemented
        return (self.skeleton == other.skeleton and self.projection == other.projection
                and self.hpairs == other.hpairs and self.vpairs == other.vpairs
                and [r.name for r in self.window_rules] == [r.name for r in other.window_rules])

    def __hash__(self) -> int:
        return hash((self.name, self.hpairs, self.vpairs))


def sigma_af(bound: int = SIGMA_AF_BOUND, min_interior: int = 1) -> PatternLibrary:
    """3x3 library of every window seen around single obstacles with interiors up to bound."""
    if min_interior < 1 or bound < min_interior:
        raise LibraryError(f"bad generation range {min_interior}..{bound}")
    patterns: Set[Pattern] = set()
    for w in range(min_interior, bound + 1):
        for h in range(min_interior, bound + 1):
            x = Configuration(F_ALPHABET, obstacle_cells((0, 0), w, h))
            for cx in range(-3, w + 3):
                for cy in range(-3, h + 3):
                    window = extract(x, (cx - 1, cy - 1), 3, 3)
                    patterns.add(Pattern(3, 3, tuple(c if c in OBSTACLE_STATES else STAR for c in window.cells)))
    name = "sigma-af" if min_interior == 1 else f"sigma-af-min{min_interior}"
    logger.debug("generated %s with %d patterns (bound %d)", name, len(patterns), bound)
    return PatternLibrary(name, 3, 3, patterns)


_SIGMA_AF_CACHE: Dict[int, PatternLibrary] = {}


def default_sigma_af(min_interior: int = 1) -> PatternLibrary:
    """Shared Σ_AF instance per minimum interior."""
    if min_interior not in _SIGMA_AF_CACHE:
        _SIGMA_AF_CACHE[min_interior] = sigma_af(SIGMA_AF_BOUND, min_interior)
    return _SIGMA_AF_CACHE[min_interior]


def export_library(lib: PatternLibrary) -> str:
    """Deterministic text listing; one pattern per block, wildcards by class name."""
    wildcards = sorted({c for p in lib.allowed for c in p.cells if isinstance(c, Wildcard)}, key=lambda c: c.name)
    lines = [f"library: {lib.name}", f"window: {lib.window_w}x{lib.window_h}"]
    for wc in wildcards:
        lines.append(f"class {wc.name}: {' '.join(sorted(wc.states))}")
    if isinstance(lib, ConstrainedLibrary):
        for name, pairs in (("h", lib.hpairs), ("v", lib.vpairs)):
            for a, b in sorted(pairs):
                lines.append(f"{name}: {a} {b}")
        for rule in lib.window_rules:
            lines.append(f"rule: {rule.name}")
    lines.append(f"patterns: {len(lib.allowed)}")
    for p in sorted(lib.allowed, key=Pattern.sort_key):
        lines.append("")
        for row in p.rows():
            lines.append(" ".join(c.name if isinstance(c, Wildcard) else c for c in row))
    return "\n".join(lines) + "\n"


def _dilate(positions: Iterable[Position], rx: int, ry: int) -> Set[Position]:
    out = set()
    for (px, py) in positions:
        for dx in range(-rx, rx + 1):
            for dy in range(-ry, ry + 1):
                out.add((px + dx, py + dy))
    return out


def _scan(x: Configuration, lib: PatternLibrary, centers: List[Position]) -> List[Position]:
    offsets = tuple((dx, dy) for dy in range(lib.window_h // 2, lib.window_h // 2 - lib.window_h, -1)
                    for dx in range(-(lib.window_w // 2), lib.window_w - lib.window_w // 2))
    get = x.get
    return [c for c in centers if not lib.contains(window_at(get, c, offsets))]


def violations(x: Configuration, lib: PatternLibrary, threads: int = 1) -> Set[Position]:
    """Window centers whose window matches no allowed pattern."""
    background_window = (x.background,) * (lib.window_w * lib.window_h)
    if not lib.contains(background_window):
        raise LibraryError(f"library {lib.name} forbids the uniform {x.background!r} window")
    centers = sorted(_dilate(x.support(), lib.window_w // 2, lib.window_h // 2))
    if threads <= 1 or len(centers) < 256:
        return set(_scan(x, lib, centers))
    chunk = (len(centers) + threads - 1) // threads
    parts = [centers[i:i + chunk] for i in range(0, len(centers), chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        found = pool.map(lambda part: _scan(x, lib, part), parts)
    return {c for part in found for c in part}


def _components(cells: Mapping[Position, str], members: FrozenSet[str]) -> List[List[Position]]:
    seen: Set[Position] = set()
    components = []
    for start in sorted(p for p, s in cells.items() if s in members):
        if start in seen:
            continue
        stack, component = [start], []
        seen.add(start)
        while stack:
            p = stack.pop()
            component.append(p)
            for q in ((p[0] + 1, p[1]), (p[0] - 1, p[1]), (p[0], p[1] + 1), (p[0], p[1] - 1)):
                if q not in seen and cells.get(q) in members:
                    seen.add(q)
                    stack.append(q)
        components.append(sorted(component))
    return components


def decompose_obstacles(x: Configuration, obstacle_states: FrozenSet[str] = OBSTACLE_STATES,
                        min_interior: int = 1) -> List[Obstacle]:
    """Certify every maximal 4-connected obstacle-state region as a framed, spaced rectangle.

    Interior states are the obstacle states that are not arrows; regions whose
    interior is not all `1` are reported with kind `tm`.
    """
    cells = x.cells()
    interior_states = obstacle_states - frozenset(ARROWS)
    obstacles = []
    for component in _components(cells, obstacle_states):
        xs = [p[0] for p in component]
        ys = [p[1] for p in component]
        left, right, bottom, top = min(xs), max(xs), min(ys), max(ys)
        members = set(component)
        for px in range(left, right + 1):
            for py in range(bottom, top + 1):
                if (px, py) not in members:
                    raise ObstacleError("non-rectangular obstacle", (px, py))
        w, h = right - left - 1, top - bottom - 1
        if w < min_interior or h < min_interior:
            raise ObstacleError(f"obstacle interior {max(w, 0)}x{max(h, 0)} below minimum {min_interior}",
                                (left, bottom))
        kind = "plain"
        for px in range(left, right + 1):
            for py in range(bottom, top + 1):
                expected = border_state(px - left - 1, py - bottom - 1, w, h)
                state = cells[(px, py)]
                if expected is None:
                    if state not in interior_states:
                        raise ObstacleError(f"bad interior state {state!r}", (px, py))
                    if state != "1":
                        kind = "tm"
                elif state != expected:
                    raise ObstacleError(f"bad framing: {state!r} where {expected!r} belongs", (px, py))
        obstacles.append(Obstacle((left + 1, bottom + 1), w, h, kind))
    for i, a in enumerate(obstacles):
        for b in obstacles[i + 1:]:
            if a.distance_to(b) < 3:
                raise ObstacleError("obstacles closer than two free cells", _between(a, b))
    logger.debug("decomposed %d obstacles", len(obstacles))
    return obstacles


def _between(a: Obstacle, b: Obstacle) -> Position:
    """A position within distance 1 of a and as close as possible to b."""
    l1, b1, r1, t1 = a.footprint
    l2, b2, r2, t2 = b.footprint
    cx = min(max((l2 + r2) // 2, l1 - 1), r1 + 1)
    cy = min(max((b2 + t2) // 2, b1 - 1), t1 + 1)
    return (cx, cy)


def obstacle_configuration(obstacles: Iterable[Union[Obstacle, Tuple[Position, int, int]]],
                           fill: Fill = "1", alphabet: Alphabet = F_ALPHABET) -> Configuration:
    """Configuration holding the given well-formed obstacles over background 0."""
    cells: Dict[Position, str] = {}
    for ob in obstacles:
        if isinstance(ob, Obstacle):
            origin, w, h = ob.interior_origin, ob.interior_w, ob.interior_h
        else:
            origin, w, h = ob
        cells.update(obstacle_cells(origin, w, h, fill))
    return Configuration(alphabet, cells)


def random_obstacle_field(rng: np.random.Generator, count: int,
                          window: Tuple[int, int, int, int] = (0, -30, 59, 29),
                          max_interior: int = 5, min_interior: int = 1,
                          keep_free: Iterable[Position] = (), attempts: int = 200) -> Tuple[Configuration, List[Obstacle]]:
    """Up to `count` plain obstacles with footprints inside window, pairwise spaced.

    Footprints avoid every keep_free position by at least two cells.
    """
    left, bottom, right, top = window
    keep = list(keep_free)
    placed: List[Obstacle] = []
    for _ in range(count):
        for _ in range(attempts):
            w, h = (int(v) for v in rng.integers(min_interior, max_interior + 1, size=2))
            if right - left < w + 1 or top - bottom < h + 1:
                continue
            x0 = int(rng.integers(left + 1, right - w + 1))
            y0 = int(rng.integers(bottom + 1, top - h + 1))
            candidate = Obstacle((x0, y0), w, h)
            if any(candidate.distance_to(o) < 3 for o in placed):
                continue
            fl, fb, fr, ft = candidate.footprint
            if any(fl - 2 <= p[0] <= fr + 2 and fb - 2 <= p[1] <= ft + 2 for p in keep):
                continue
            placed.append(candidate)
            break
    logger.debug("random field: %d of %d obstacles placed", len(placed), count)
    return obstacle_configuration(placed), placed
