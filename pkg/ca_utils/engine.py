#!/usr/bin/env python3
"""
Synchronous stepping of 2D cellular automata over finite configurations.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, NamedTuple, Optional, Set, Tuple

from .errors import AlphabetMismatchError
from .grid import Configuration, Position
from .rules import RuleTable

logger = logging.getLogger(__name__)

PARALLEL_THRESHOLD = 512


def dilate(positions: Iterable[Position], radius: int) -> Set[Position]:
    out: Set[Position] = set()
    span = range(-radius, radius + 1)
    for (px, py) in positions:
        for dx in span:
            for dy in span:
                out.add((px + dx, py + dy))
    return out


def _check(x: Configuration, rt: RuleTable):
    if x.alphabet != rt.alphabet:
        raise AlphabetMismatchError(f"configuration over {x.alphabet.name}, rules over {rt.alphabet.name}")
    if x.background != rt.quiescent:
        raise AlphabetMismatchError(
            f"background {x.background!r} is not the quiescent state {rt.quiescent!r}")


def _evaluate(cells: Dict[Position, str], rt: RuleTable, quiescent: str,
              positions: List[Position]) -> List[Tuple[Position, str]]:
    """New states for the given positions, only where they change."""
    local = rt.local
    offsets = rt.offsets
    get = cells.get
    changed = []
    for (cx, cy) in positions:
        window = tuple(get((cx + dx, cy + dy), quiescent) for dx, dy in offsets)
        new = local(window)
        if new != get((cx, cy), quiescent):
            changed.append(((cx, cy), new))
    return changed


class Simulation:
    """Incremental synchronous stepper.

    The first generation evaluates every cell within the radius of the
    support; later generations only re-evaluate cells within the radius of
    a cell that changed in the previous generation.
    """

    def __init__(self, x: Configuration, rt: RuleTable, threads: int = 1,
                 changed: Optional[Iterable[Position]] = None):
        _check(x, rt)
        self.rule_table = rt
        self.alphabet = x.alphabet
        self.threads = max(1, threads)
        self.time = 0
        self._cells = x.cells()
        # None: nothing known yet, evaluate the whole dilated support
        self._changed: Optional[Set[Position]] = None if changed is None else set(changed)

    @property
    def configuration(self) -> Configuration:
        return Configuration(self.alphabet, self._cells, self.rule_table.quiescent)

    def get(self, pos: Position) -> str:
        return self._cells.get(pos, self.rule_table.quiescent)

    def is_stable(self) -> bool:
        """True once a generation changed nothing; later generations are then identical."""
        return self._changed is not None and not self._changed

    def step(self) -> Set[Position]:
        """Advance one generation; returns the positions that changed."""
        rt = self.rule_table
        seeds = self._cells.keys() if self._changed is None else self._changed
        candidates = sorted(dilate(seeds, rt.radius))
        updates = self._evaluate_all(candidates)
        quiescent = rt.quiescent
        for pos, state in updates:
            if state == quiescent:
                self._cells.pop(pos, None)
            else:
                self._cells[pos] = state
        self._changed = {pos for pos, _ in updates}
        self.time += 1
        logger.debug("t=%d: %d candidates, %d changed", self.time, len(candidates), len(updates))
        return self._changed

    def _evaluate_all(self, candidates: List[Position]) -> List[Tuple[Position, str]]:
        rt = self.rule_table
        if self.threads == 1 or len(candidates) < PARALLEL_THRESHOLD:
            return _evaluate(self._cells, rt, rt.quiescent, candidates)
        chunk = (len(candidates) + self.threads - 1) // self.threads
        parts = [candidates[i:i + chunk] for i in range(0, len(candidates), chunk)]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            results = pool.map(lambda part: _evaluate(self._cells, rt, rt.quiescent, part), parts)
        return [item for part in results for item in part]

    def run(self, t: int) -> "Simulation":
        if t < 0:
            raise ValueError("t must be non-negative")
        for _ in range(t):
            if self.is_stable():
                self.time += 1
                continue
            self.step()
        return self


def step(x: Configuration, rt: RuleTable, threads: int = 1) -> Configuration:
    """One synchronous update F(x)."""
    sim = Simulation(x, rt, threads)
    sim.step()
    return sim.configuration


def run(x: Configuration, rt: RuleTable, t: int, threads: int = 1) -> Configuration:
    """F^t(x)."""
    return Simulation(x, rt, threads).run(t).configuration


def orbit(x: Configuration, rt: RuleTable, t: int, threads: int = 1) -> List[Configuration]:
    """[x, F(x), ..., F^t(x)]."""
    sim = Simulation(x, rt, threads)
    frames = [x]
    for _ in range(t):
        sim.run(1)
        frames.append(sim.configuration)
    return frames


class ParticleSite(NamedTuple):
    position: Position
    well_formed: bool


def particles(x: Configuration) -> List[ParticleSite]:
    """U cells, flagged well-formed when D sits directly below."""
    return [ParticleSite(p, x[(p[0], p[1] - 1)] == "D") for p in x.positions_with(("U",))]
