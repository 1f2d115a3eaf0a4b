#!/usr/bin/env python3
"""
Escape paths for particles in an obstacle field.

From a free start z0, build_path extends a path z0, z1, ... to the right.
A particle placed at z_n reaches z0 after exactly n steps. Free space
costs one index per column. Around an obstacle of footprint W x H the
path climbs the left side, crosses the top and comes down the right side
to the row where a particle entering there recombines at the start row.
That detour costs H + W + 1 indices.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import FrozenSet, List, Optional, Sequence, Tuple

from .engine import Simulation
from .errors import ObstacleError, RoutingError
from .grid import Configuration, Position
from .rules import RuleTable, f_automaton
from .sft import OBSTACLE_STATES, PARTICLE_STATES, Obstacle, decompose_obstacles, default_sigma_af, violations

logger = logging.getLogger(__name__)

BELOW_FREE = "below-free"
ABOVE_FREE = "above-free"

Placement = Tuple[Position, Position]


@dataclass(frozen=True)
class Path:
    """Escape path plus, per index, where the U and D cells of a particle sit."""

    points: Tuple[Position, ...]
    case_tag: str
    placements: Tuple[Placement, ...]
    anchors: Tuple[int, ...]
    n0: int = 0

    def __len__(self) -> int:
        return len(self.points)

    @property
    def start(self) -> Position:
        return self.points[0]


def _blocking(obstacles: Sequence[Obstacle], cells: Sequence[Position]) -> Optional[Obstacle]:
    for ob in obstacles:
        if any(ob.contains(c) for c in cells):
            return ob
    return None


def _detour(cur: Position, ob: Obstacle) -> Tuple[List[Position], List[Position]]:
    """Detour points for tracked U at cur, and the companion D route from the exit."""
    left, bottom, right, top = ob.footprint
    x, y = cur
    y_exit = top + bottom + 1 - y
    points = [(left - 1, yy) for yy in range(y + 1, top + 2)]
    points += [(xx, top + 1) for xx in range(left, right + 2)]
    points += [(right + 1, yy) for yy in range(top, y_exit - 1, -1)]
    d_route = [(right + 1, yy) for yy in range(y_exit - 1, bottom - 2, -1)]
    d_route += [(xx, bottom - 1) for xx in range(right, left - 2, -1)]
    d_route += [(left - 1, yy) for yy in range(bottom, y)]
    return points, d_route


def _build_below_free(obstacles: Sequence[Obstacle], z0: Position, length: int) -> Tuple[List[Position], List[Placement], List[int]]:
    points = [z0]
    placements = [(z0, (z0[0], z0[1] - 1))]
    anchors = [0]
    cur = z0
    while len(points) < length:
        ahead = [(cur[0] + 1, cur[1]), (cur[0] + 1, cur[1] - 1)]
        ob = _blocking(obstacles, ahead)
        if ob is None:
            cur = ahead[0]
            points.append(cur)
            placements.append((cur, (cur[0], cur[1] - 1)))
        else:
            detour, d_route = _detour(cur, ob)
            m = len(detour)
            for j, p in enumerate(detour, start=1):
                placements.append((p, d_route[m - j]))
            points.extend(detour)
            cur = detour[-1]
            logger.debug("detour of %d around obstacle at %s", m, ob.interior_origin)
        anchors.append(len(points) - 1)
    return points, placements, anchors


def _mirror(p: Position) -> Position:
    return (p[0], -p[1])


def _mirror_obstacle(ob: Obstacle) -> Obstacle:
    x0, y0 = ob.interior_origin
    return Obstacle((x0, -(y0 + ob.interior_h - 1)), ob.interior_w, ob.interior_h, ob.kind)


def field_obstacles(x: Configuration, obstacle_states: FrozenSet[str] = OBSTACLE_STATES) -> List[Obstacle]:
    """Obstacles of a particle-free admissible field, or RoutingError."""
    if x.positions_with(PARTICLE_STATES):
        raise RoutingError("field holds particles")
    if obstacle_states == OBSTACLE_STATES:
        found = violations(x, default_sigma_af())
        if found:
            raise RoutingError(f"field is not admissible near {min(found)}")
    try:
        return decompose_obstacles(x, obstacle_states)
    except ObstacleError as e:
        raise RoutingError(str(e))


def build_path(x: Configuration, z0: Position, length: int,
               obstacle_states: FrozenSet[str] = OBSTACLE_STATES) -> Path:
    """Escape path of at least `length` points from the free cell z0."""
    if length < 1:
        raise RoutingError("length must be at least 1")
    obstacles = field_obstacles(x, obstacle_states)
    if x[z0] != x.alphabet.quiescent:
        raise RoutingError(f"start {z0} is occupied")
    zx, zy = z0
    if _blocking(obstacles, [(zx + 1, zy - 1), (zx + 1, zy), (zx + 1, zy + 1)]) is not None:
        raise RoutingError(f"start {z0} touches an obstacle on its right")
    above, below = (zx, zy + 1), (zx, zy - 1)
    if x[above] == x.alphabet.quiescent:
        mirrored = [_mirror_obstacle(ob) for ob in obstacles]
        points, placements, anchors = _build_below_free(mirrored, _mirror(z0), length)
        points = [_mirror(p) for p in points]
        # mirrored U is the original D and vice versa
        placements = [(_mirror(d), _mirror(u)) for u, d in placements]
        tag = ABOVE_FREE
    elif x[below] == x.alphabet.quiescent:
        points, placements, anchors = _build_below_free(obstacles, z0, length)
        tag = BELOW_FREE
    else:
        raise RoutingError(f"start {z0} has no free cell above or below")
    logger.info("built %s path from %s with %d points", tag, z0, len(points))
    return Path(tuple(points), tag, tuple(placements), tuple(anchors))


def place_particle(x: Configuration, z: Position) -> Configuration:
    """Add U at z and D directly below."""
    below = (z[0], z[1] - 1)
    q = x.alphabet.quiescent
    if x[z] != q or x[below] != q:
        raise RoutingError(f"cannot place a particle at {z}: cells occupied")
    return x.with_cells({z: "U", below: "D"})


def place_at(x: Configuration, path: Path, n: int) -> Configuration:
    """x_n: the field with the particle cells of path index n added."""
    u, d = path.placements[n]
    q = x.alphabet.quiescent
    if x[u] != q or x[d] != q:
        raise RoutingError(f"cannot place the particle of index {n}: cells occupied")
    return x.with_cells({u: "U", d: "D"})


def _advance(x: Configuration, path: Path, n: int, t: int, rt: RuleTable) -> Simulation:
    u, d = path.placements[n]
    # the particle-free field is a fixed point: only cells near the particle move
    sim = Simulation(place_at(x, path, n), rt, changed=[u, d])
    return sim.run(t)


def verify_arrival(x: Configuration, path: Path, n: int, rt: Optional[RuleTable] = None) -> bool:
    """(F^n(x_n))(z0) is U or D."""
    if not 0 <= n < len(path):
        raise RoutingError(f"index {n} outside path of {len(path)} points")
    rt = rt or f_automaton()
    return _advance(x, path, n, n, rt).get(path.start) in PARTICLE_STATES


def verify_segment(x: Configuration, path: Path, i: int, rt: Optional[RuleTable] = None) -> bool:
    """A particle placed at anchor i+1 sits whole at anchor i after the index difference."""
    n, m = path.anchors[i], path.anchors[i + 1]
    rt = rt or f_automaton()
    sim = _advance(x, path, m, m - n, rt)
    u, d = path.placements[n]
    return sim.get(u) == "U" and sim.get(d) == "D"


def calibrate_n0(x: Configuration, path: Path, rt: Optional[RuleTable] = None, threads: int = 1) -> int:
    """Smallest index from which every later arrival check passes."""
    rt = rt or f_automaton()
    indices = range(len(path))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda n: verify_arrival(x, path, n, rt), indices))
    else:
        results = [verify_arrival(x, path, n, rt) for n in indices]
    n0 = len(path)
    while n0 > 0 and results[n0 - 1]:
        n0 -= 1
    logger.debug("calibrated n0=%d over %d indices", n0, len(path))
    return n0


def with_n0(path: Path, n0: int) -> Path:
    return replace(path, n0=n0)
