#!/usr/bin/env python3
"""
Compilers from Turing machines to obstacle/particle CA, and the search for
admissible obstacles.

phi2 replaces the obstacle interior state `1` by the machine's space-time
tiles without final state, so obstacles can only be as tall as the machine
runs. phi3 adds the final-state tiles and a `qf` pad and requires the
top-right interior cell to be final, so every admissible obstacle holds a
halting computation.

Compiled CA serialise as `ca-rules v1` with a `provenance:` header and the
source embedded under `source:`; loading recompiles from the source.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Set, Tuple

from .errors import CAError, FormatError
from .grid import Alphabet, Configuration, Position, Window
from .rules import (RULES_MAGIC, ObstacleRuleTable, RuleTable, f_automaton, format_rule_table,
                    parse_headers, parse_rule_table)
from .sft import ARROWS, ConstrainedLibrary, PatternLibrary, WindowRule, default_sigma_af, obstacle_cells
from .turing import TmTileSet, TuringMachine, format_tm, parse_tm, tm_to_tileset

logger = logging.getLogger(__name__)

PAD = "qf"
FREE = ("U", "D", "0")


class Provenance(NamedTuple):
    phi: str
    source_name: str
    source: str


@dataclass(frozen=True)
class CompiledCA:
    """A rule table with its obstacle library and where it came from."""

    rule_table: RuleTable
    obstacle_library: Optional[PatternLibrary]
    provenance: Provenance
    interior_states: FrozenSet[str] = frozenset({"1"})
    final_states: FrozenSet[str] = frozenset()

    @property
    def name(self) -> str:
        return self.rule_table.name


def plain_f(violation_scope: str = "center-window", min_interior: int = 1) -> CompiledCA:
    """F itself, in the compiled-CA shape."""
    rt = f_automaton(violation_scope, min_interior)
    return CompiledCA(rt, rt.library, Provenance("F", "F", ""))


# phi2 / phi3


def _compiled_alphabet(name: str, interior: Sequence[str]) -> Alphabet:
    obstacle = frozenset(ARROWS) | frozenset(interior)
    return Alphabet(name, FREE + ARROWS + tuple(interior), "0",
                    classes=(("A", obstacle), ("particle", frozenset({"U", "D"}))))


def _seed_rules(ts: TmTileSet) -> List[WindowRule]:
    start, blank = ts.start, ts.blank

    def start_at_corner(w: Window) -> bool:
        return w[4] != start or w[6] == "↗"

    def corner_holds_start(w: Window) -> bool:
        return w[6] != "↗" or w[4] == start

    def blank_on_bottom_row(w: Window) -> bool:
        if w[7] != "↑" or "↗" in w:
            return True
        return w[4] == blank

    return [WindowRule("start-at-lower-left", start_at_corner),
            WindowRule("lower-left-holds-start", corner_holds_start),
            WindowRule("bottom-row-blank", blank_on_bottom_row)]


def _border_pairs(interior: Sequence[str], left_ok: Set[str], right_ok: Set[str],
                  bottom_ok: Set[str]) -> Tuple[Set[Tuple[str, str]], Set[Tuple[str, str]]]:
    hpairs = {("→", t) for t in interior if t in left_ok} | {(t, "←") for t in interior if t in right_ok}
    vpairs = {("↑", t) for t in interior if t in bottom_ok} | {(t, "↓") for t in interior}
    return hpairs, vpairs


def phi2(m: TuringMachine, violation_scope: str = "center-window", min_interior: int = 1) -> CompiledCA:
    """Obstacles carry the machine's computation; final states are not allowed."""
    ts = tm_to_tileset(m)
    interior = [t for t in ts.tileset.tiles if t not in ts.final]
    inside = set(interior)
    hpairs = {(a, b) for a, b in ts.tileset.hpairs if a in inside and b in inside}
    vpairs = {(a, b) for a, b in ts.tileset.vpairs if a in inside and b in inside}
    bh, bv = _border_pairs(interior, set(ts.left_edge), set(ts.right_edge), {ts.blank, ts.start})
    library = ConstrainedLibrary(
        f"phi2-{m.name}", default_sigma_af(min_interior), {t: "1" for t in interior}, interior,
        hpairs | bh, vpairs | bv, _seed_rules(ts))
    ca = _assemble("phi2", m, interior, library, violation_scope, min_interior, frozenset())
    logger.info("compiled phi2 for %s: %d interior states", m.name, len(interior))
    return ca


def phi3(m: TuringMachine, violation_scope: str = "center-window", min_interior: int = 1) -> CompiledCA:
    """Obstacles must contain a halting computation; a `qf` pad fills the rest."""
    ts = tm_to_tileset(m)
    interior = list(ts.tileset.tiles) + [PAD]
    halted = set(ts.final) | {PAD}
    departs_to_final = {t for t, tile in ts.tiles.items() if tile.departure == ("L", m.final)}

    hpairs: Set[Tuple[str, str]] = set()
    for a, b in ts.tileset.hpairs:
        # a head that halts moving left leaves its departure tile just right of the final tile
        if a in halted and b not in departs_to_final:
            continue
        hpairs.add((a, b))
    vpairs = {(a, b) for a, b in ts.tileset.vpairs if a not in halted}
    for t in interior:
        hpairs.add((t, PAD))
        vpairs.add((t, PAD))
    bh, bv = _border_pairs(interior, set(ts.left_edge) | {PAD}, set(ts.right_edge) | {PAD},
                           {ts.blank, ts.start})

    def corner_is_halted(w: Window) -> bool:
        return w[4] != "↙" or w[6] in halted

    def pad_follows_halt(w: Window) -> bool:
        return w[4] != PAD or w[3] in halted or w[7] in halted

    rules = _seed_rules(ts) + [WindowRule("upper-right-halted", corner_is_halted),
                               WindowRule("pad-follows-halt", pad_follows_halt)]
    library = ConstrainedLibrary(
        f"phi3-{m.name}", default_sigma_af(min_interior), {t: "1" for t in interior}, interior,
        hpairs | bh, vpairs | bv, rules)
    ca = _assemble("phi3", m, interior, library, violation_scope, min_interior, frozenset(halted))
    logger.info("compiled phi3 for %s: %d interior states", m.name, len(interior))
    return ca


def _assemble(phi: str, m: TuringMachine, interior: Sequence[str], library: ConstrainedLibrary,
              violation_scope: str, min_interior: int, final_states: FrozenSet[str]) -> CompiledCA:
    alphabet = _compiled_alphabet(f"{phi}-{m.name}", interior)
    f = f_automaton()
    rt = ObstacleRuleTable(f"{phi}-{m.name}", alphabet, library, alphabet.state_class("A"), f.rules,
                           violation_scope, min_interior)
    return CompiledCA(rt, library, Provenance(phi, m.name, format_tm(m)), frozenset(interior), final_states)


# admissible obstacle search


class ObstacleExtent(NamedTuple):
    """Admissible interior sizes up to bound x bound."""

    max_w: int
    max_h: int
    bound: int
    admissible: FrozenSet[Tuple[int, int]]
    witnesses: Dict[Tuple[int, int], Tuple[Tuple[str, ...], ...]]

    @property
    def unbounded(self) -> bool:
        return (self.bound, self.bound) in self.admissible

    @property
    def empty(self) -> bool:
        return not self.admissible

    @property
    def l(self) -> int:
        return min(self.max_w, self.max_h)


def _window(rows: Sequence[Sequence[str]], c: int) -> Window:
    """3x3 window centred on column c of the middle row; rows listed top first."""
    return tuple(rows[0][c - 1:c + 2]) + tuple(rows[1][c - 1:c + 2]) + tuple(rows[2][c - 1:c + 2])


class _WidthSearch:
    """Row-by-row search of w-wide interiors, recording every closable height."""

    def __init__(self, ca: CompiledCA, width: int, bound: int):
        self.library = ca.obstacle_library
        self.interior = [s for s in ca.rule_table.alphabet.states if s in ca.interior_states]
        self.hpairs = getattr(self.library, "hpairs", None)
        self.vpairs = getattr(self.library, "vpairs", None)
        self.w = width
        self.bound = bound
        # padded rows: two free cells, border, interior, border, two free cells
        self.outside = ("0",) * (width + 6)
        self.bottom = ("0", "0", "↗") + ("↑",) * width + ("↖", "0", "0")
        self.top = ("0", "0", "↘") + ("↓",) * width + ("↙", "0", "0")
        self.heights: Dict[int, Tuple[Tuple[str, ...], ...]] = {}
        self._seen: Set[Tuple[Tuple[str, ...], Tuple[str, ...], int]] = set()

    def ok(self, top: Sequence[str], mid: Sequence[str], bottom: Sequence[str], c: int) -> bool:
        return self.library.contains(_window((top, mid, bottom), c))

    def row_ok(self, top, mid, bottom) -> bool:
        return all(self.ok(top, mid, bottom, c) for c in range(1, self.w + 5))

    def run(self) -> Dict[int, Tuple[Tuple[str, ...], ...]]:
        if not self.row_ok(self.bottom, self.outside, self.outside):
            return {}
        self._rows(self.outside, self.bottom, [])
        return self.heights

    def _close(self, prev: Tuple[str, ...], last: Tuple[str, ...], stack: List[Tuple[str, ...]]):
        h = len(stack)
        if h in self.heights:
            return
        if (self.row_ok(self.top, last, prev) and self.row_ok(self.outside, self.top, last)
                and self.row_ok(self.outside, self.outside, self.top)):
            self.heights[h] = tuple(tuple(r[3:3 + self.w]) for r in stack)

    def _rows(self, prev: Tuple[str, ...], last: Tuple[str, ...], stack: List[Tuple[str, ...]]):
        h = len(stack)
        if h > 0:
            self._close(prev, last, stack)
        if h == self.bound or len(self.heights) == self.bound:
            return
        key = (prev, last, h)
        if key in self._seen:
            return
        self._seen.add(key)
        for row in self._fillings(prev, last):
            stack.append(row)
            self._rows(last, row, stack)
            stack.pop()

    def _fillings(self, prev: Tuple[str, ...], last: Tuple[str, ...]):
        """Complete rows above `last`; windows centred on `last` are checked as cells land."""
        w = self.w
        cells = ["0", "0", "→"] + [None] * w + ["←", "0", "0"]

        def extend(i: int):
            if i == w:
                if all(self.ok(cells, last, prev, c) for c in range(w + 1, w + 5)):
                    yield tuple(cells)
                return
            col = 3 + i
            left = cells[col - 1]
            below = last[col]
            for s in self.interior:
                if self.hpairs is not None and (left, s) not in self.hpairs:
                    continue
                if self.vpairs is not None and (below, s) not in self.vpairs:
                    continue
                cells[col] = s
                # every window centred left of col on the row below is now complete
                if self.ok(cells, last, prev, col - 1) and (i > 0 or self.ok(cells, last, prev, 1)):
                    yield from extend(i + 1)
            cells[col] = None

        yield from extend(0)


def max_admissible_obstacle(ca: CompiledCA, bound: int, threads: int = 1) -> ObstacleExtent:
    """Every interior size up to bound x bound that admits a library-admissible filling."""
    if bound < 1:
        raise CAError("bound must be at least 1")
    if ca.obstacle_library is None:
        raise CAError(f"{ca.name} has no obstacle library")
    widths = range(1, bound + 1)

    def search(w: int):
        return w, _WidthSearch(ca, w, bound).run()

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(search, widths))
    else:
        results = [search(w) for w in widths]
    admissible = set()
    witnesses = {}
    for w, heights in results:
        for h, rows in heights.items():
            admissible.add((w, h))
            witnesses[(w, h)] = rows
    max_w = max((w for w, _ in admissible), default=0)
    max_h = max((h for _, h in admissible), default=0)
    logger.info("%s: %d admissible sizes up to %d, max %dx%d", ca.name, len(admissible), bound, max_w, max_h)
    return ObstacleExtent(max_w, max_h, bound, frozenset(admissible), witnesses)


def obstacle_from_witness(ca: CompiledCA, rows: Sequence[Sequence[str]], origin: Position = (0, 0)) -> Configuration:
    """Configuration of the obstacle whose interior rows (bottom first) are given."""
    h, w = len(rows), len(rows[0])
    cells = obstacle_cells(origin, w, h, lambda dx, dy: rows[dy][dx])
    return Configuration(ca.rule_table.alphabet, cells)


# serialisation


def format_compiled(ca: CompiledCA) -> str:
    """`ca-rules v1` text; compiled CA carry provenance and their source."""
    rt = ca.rule_table
    if ca.provenance.phi == "F":
        return format_rule_table(rt)
    text = format_rule_table(rt, [f"provenance: {ca.provenance.phi}", f"source-name: {ca.provenance.source_name}"])
    source = ["", "source:"] + [f"| {line}".rstrip() for line in ca.provenance.source.rstrip("\n").split("\n")]
    return text + "\n".join(source) + "\n"


def _embedded_source(lines: List[str], start: int) -> str:
    for i in range(start, len(lines)):
        if lines[i].strip() == "source:":
            body = []
            for line in lines[i + 1:]:
                if not line.strip():
                    continue
                if not line.startswith("|"):
                    raise FormatError("source lines start with '| '", line=i + 2 + len(body), column=1)
                body.append(line[2:] if line.startswith("| ") else line[1:])
            return "\n".join(body) + "\n"
    raise FormatError("compiled rules need an embedded 'source:' section")


def compile_source(phi: str, source: str, violation_scope: str = "center-window",
                   min_interior: int = 1) -> CompiledCA:
    if phi in ("phi2", "phi3"):
        m = parse_tm(source)
        return (phi2 if phi == "phi2" else phi3)(m, violation_scope, min_interior)
    if phi == "phi4":
        from .tiling import parse_tileset
        from .tobstacles import phi4
        return phi4(parse_tileset(source), violation_scope, min_interior)
    raise FormatError(f"unknown provenance {phi!r}")


def compile_from_rules_text(headers: Dict[str, str], lines: List[str], start: int) -> CompiledCA:
    try:
        min_interior = int(headers.get("min-interior", "1"))
    except ValueError:
        raise FormatError("min-interior must be an integer")
    return compile_source(headers["provenance"], _embedded_source(lines, start),
                          headers.get("violation-scope", "center-window"), min_interior)


def parse_compiled(text: str) -> CompiledCA:
    """CompiledCA for any `ca-rules v1` text."""
    lines = text.split("\n")
    if lines and lines[0].strip() == RULES_MAGIC:
        headers, _, i = parse_headers(lines, 1)
        if "provenance" in headers:
            return compile_from_rules_text(headers, lines, i)
    rt = parse_rule_table(text)
    if isinstance(rt, ObstacleRuleTable):
        interior = rt.obstacle_class - frozenset(ARROWS)
        return CompiledCA(rt, rt.library, Provenance("F", rt.name, ""), frozenset(interior))
    return CompiledCA(rt, None, Provenance("lift", rt.name, ""), frozenset())


def load_rules(path: str) -> CompiledCA:
    with open(path, "r", encoding="utf-8") as f:
        return parse_compiled(f.read())
