#!/usr/bin/env python3
"""
Turing machines on a semi-infinite tape and their space-time tilings.

Text format `tm v1`:

    tm v1
    name: bounce
    initial: a
    final: h
    blank: 0
    a 0 -> b 1 R
    b 0 -> h 1 L

Transitions must be total on the non-final states. A left move on cell 0
leaves the head on cell 0.

tm_to_tileset encodes row t of a tiling as the tape at time t. A tile is
(symbol, head state, arrival, departure): arrival is how the head got
here during the last step (`L` from the left, `R` from the right, `S` at
the start, `B` after bouncing on cell 0, `-` no head) and departure is
the (move, state) of a head that just left this cell.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

from .errors import FormatError, TuringMachineError
from .tiling import TileSet, Tiling, search_tiling

logger = logging.getLogger(__name__)

TM_MAGIC = "tm v1"
FORBIDDEN_CHARS = set(" \t|./")
MOVES = ("L", "R")

Transition = Tuple[str, str, str]


@dataclass(frozen=True)
class TuringMachine:
    """Deterministic machine with a single final state."""

    name: str
    states: Tuple[str, ...]
    symbols: Tuple[str, ...]
    initial: str
    final: str
    blank: str
    transitions: Tuple[Tuple[Tuple[str, str], Transition], ...]

    def __post_init__(self):
        for token in self.states + self.symbols:
            if not token or FORBIDDEN_CHARS & set(token):
                raise TuringMachineError(f"bad state or symbol name {token!r}")
        if self.initial not in self.states or self.final not in self.states:
            raise TuringMachineError("initial and final states must be declared")
        if self.initial == self.final:
            raise TuringMachineError("initial and final states must differ")
        if self.blank not in self.symbols:
            raise TuringMachineError(f"blank {self.blank!r} is not a tape symbol")
        delta = dict(self.transitions)
        if len(delta) != len(self.transitions):
            raise TuringMachineError("duplicate transitions")
        for (q, s), (q2, s2, move) in self.transitions:
            if q == self.final:
                raise TuringMachineError(f"transition out of the final state on {s!r}")
            if q not in self.states or q2 not in self.states or s not in self.symbols or s2 not in self.symbols:
                raise TuringMachineError(f"transition {q} {s} -> {q2} {s2} uses undeclared names")
            if move not in MOVES:
                raise TuringMachineError(f"move must be L or R, got {move!r}")
        for q in self.states:
            if q == self.final:
                continue
            for s in self.symbols:
                if (q, s) not in delta:
                    raise TuringMachineError(f"no transition for state {q!r} on {s!r}")
        object.__setattr__(self, "_delta", delta)

    def delta(self, state: str, symbol: str) -> Transition:
        return self._delta[(state, symbol)]


class TmConfig(NamedTuple):
    tape: Tuple[str, ...]
    head: int
    state: str


class TmRun(NamedTuple):
    """Outcome of run_tm; halting_step is None while running."""

    halted: bool
    halting_step: Optional[int]
    trace: List[TmConfig]


def run_tm(m: TuringMachine, max_steps: int) -> TmRun:
    """Simulate m on the blank tape for at most max_steps transitions."""
    if max_steps < 0:
        raise TuringMachineError("max_steps must be non-negative")
    tape: List[str] = [m.blank]
    head, state = 0, m.initial
    trace = [TmConfig(tuple(tape), head, state)]
    for t in range(1, max_steps + 1):
        q2, s2, move = m.delta(state, tape[head])
        tape[head] = s2
        head = head + 1 if move == "R" else max(head - 1, 0)
        if head == len(tape):
            tape.append(m.blank)
        state = q2
        trace.append(TmConfig(tuple(tape), head, state))
        if state == m.final:
            return TmRun(True, t, trace)
    return TmRun(False, None, trace)


def _trim(tape: Sequence[str], blank: str) -> Tuple[str, ...]:
    end = len(tape)
    while end > 0 and tape[end - 1] == blank:
        end -= 1
    return tuple(tape[:end])


def same_config(a: TmConfig, b: TmConfig, blank: str) -> bool:
    """Equality up to trailing blanks."""
    return a.head == b.head and a.state == b.state and _trim(a.tape, blank) == _trim(b.tape, blank)


def parse_tm(text: str) -> TuringMachine:
    """Parse `tm v1` text; states and symbols are collected from the transitions."""
    lines = text.split("\n")
    if not lines or lines[0].strip() != TM_MAGIC:
        raise FormatError(f"missing '{TM_MAGIC}' header", line=1, column=1)
    headers: Dict[str, str] = {}
    transitions: List[Tuple[Tuple[str, str], Transition]] = []
    for i, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "->" in line:
            lhs, rhs = line.split("->", 1)
            left, right = lhs.split(), rhs.split()
            if len(left) != 2 or len(right) != 3:
                raise FormatError("transitions read 'q s -> q2 s2 L|R'", line=i, column=1)
            transitions.append(((left[0], left[1]), (right[0], right[1], right[2])))
        elif ":" in line:
            key, value = (part.strip() for part in line.split(":", 1))
            if key not in ("name", "initial", "final", "blank"):
                raise FormatError(f"unknown header {key!r}", line=i, column=1)
            headers[key] = value
        else:
            raise FormatError("expected a header or a transition", line=i, column=1)
    for key in ("initial", "final", "blank"):
        if key not in headers:
            raise FormatError(f"missing '{key}:' header")
    states: List[str] = [headers["initial"]]
    symbols: List[str] = [headers["blank"]]
    for (q, s), (q2, s2, _) in transitions:
        for st in (q, q2):
            if st not in states:
                states.append(st)
        for sym in (s, s2):
            if sym not in symbols:
                symbols.append(sym)
    if headers["final"] not in states:
        states.append(headers["final"])
    try:
        return TuringMachine(headers.get("name", "tm"), tuple(states), tuple(symbols), headers["initial"],
                             headers["final"], headers["blank"], tuple(transitions))
    except TuringMachineError as e:
        raise FormatError(str(e))


def format_tm(m: TuringMachine) -> str:
    lines = [TM_MAGIC, f"name: {m.name}", f"initial: {m.initial}", f"final: {m.final}", f"blank: {m.blank}"]
    lines += [f"{q} {s} -> {q2} {s2} {mv}" for (q, s), (q2, s2, mv) in m.transitions]
    return "\n".join(lines) + "\n"


def load_tm(path: str) -> TuringMachine:
    with open(path, "r", encoding="utf-8") as f:
        return parse_tm(f.read())


class Tile(NamedTuple):
    symbol: str
    head: Optional[str]
    arrival: str
    departure: Optional[Tuple[str, str]]

    @property
    def name(self) -> str:
        dep = "-" if self.departure is None else self.departure[0] + self.departure[1]
        return f"{self.symbol}.{self.head or '_'}.{self.arrival}.{dep}"


@dataclass(frozen=True)
class TmTileSet:
    """Tile set of a machine's space-time diagrams plus its seed and edge sets."""

    machine: TuringMachine
    tileset: TileSet
    tiles: Dict[str, Tile]
    start: str
    blank: str
    left_edge: FrozenSet[str]
    right_edge: FrozenSet[str]
    final: FrozenSet[str]

    def seed_row(self, width: int) -> List[str]:
        return [self.start] + [self.blank] * (width - 1)

    def decode_row(self, row: Sequence[str]) -> TmConfig:
        """Machine configuration encoded by one tiling row."""
        tiles = [self.tiles[name] for name in row]
        heads = [i for i, t in enumerate(tiles) if t.head is not None]
        if len(heads) != 1:
            raise TuringMachineError(f"row carries {len(heads)} heads")
        return TmConfig(tuple(t.symbol for t in tiles), heads[0], tiles[heads[0]].head)


def _horizontal_ok(p: Tile, q: Tile) -> bool:
    # a bounce only happens on cell 0
    if q.arrival == "B":
        return False
    right_link = p.departure is not None and p.departure[0] == "R"
    if right_link != (q.arrival == "L") or (right_link and p.departure[1] != q.head):
        return False
    left_link = q.departure is not None and q.departure[0] == "L"
    if left_link != (p.arrival == "R") or (left_link and q.departure[1] != p.head):
        return False
    return True


def _vertical_ok(m: TuringMachine, below: Tile, above: Tile) -> bool:
    if below.head is None:
        return (above.symbol == below.symbol and above.departure is None
                and above.arrival in ("-", "L", "R"))
    if below.head == m.final:
        return False
    q2, s2, move = m.delta(below.head, below.symbol)
    if above == Tile(s2, None, "-", (move, q2)):
        return True
    return move == "L" and above == Tile(s2, q2, "B", ("B", q2))


def tm_to_tileset(m: TuringMachine) -> TmTileSet:
    """Domino tile set whose seeded strips are the machine's space-time diagrams.

    With final-state tiles banned, the strip of width n+1 and height n+1
    over the seed row is tilable iff the machine is still running after n
    steps.
    """
    tiles: List[Tile] = [Tile(s, None, "-", None) for s in m.symbols]
    start = Tile(m.blank, m.initial, "S", None)
    tiles.append(start)
    for (q, s), (q2, s2, move) in m.transitions:
        tiles.append(Tile(s2, None, "-", (move, q2)))
        if move == "L":
            tiles.append(Tile(s2, q2, "B", ("B", q2)))
    targets = {(q2, move) for _, (q2, _, move) in m.transitions}
    for q2, move in sorted(targets):
        for s in m.symbols:
            tiles.append(Tile(s, q2, "L" if move == "R" else "R", None))
    unique: List[Tile] = []
    for t in tiles:
        if t not in unique:
            unique.append(t)
    names = tuple(t.name for t in unique)
    hpairs = {(p.name, q.name) for p in unique for q in unique if _horizontal_ok(p, q)}
    vpairs = {(b.name, a.name) for b in unique for a in unique if _vertical_ok(m, b, a)}
    tileset = TileSet(f"tm-{m.name}", names, frozenset(hpairs), frozenset(vpairs))
    left_edge = frozenset(t.name for t in unique
                          if t.arrival != "L" and (t.departure is None or t.departure[0] != "L"))
    right_edge = frozenset(t.name for t in unique
                           if t.arrival != "R" and (t.departure is None or t.departure[0] != "R"))
    final = frozenset(t.name for t in unique if t.head == m.final)
    logger.debug("machine %s compiled to %d tiles", m.name, len(names))
    return TmTileSet(m, tileset, {t.name: t for t in unique}, start.name,
                     Tile(m.blank, None, "-", None).name, left_edge, right_edge, final)


def tile_strip(ts: TmTileSet, width: int, height: int, ban_final: bool = True) -> Optional[Tiling]:
    """Seeded strip tiling (rows bottom first) or None."""
    return search_tiling(ts.tileset, width, height, bottom=ts.seed_row(width),
                         left_edge=ts.left_edge, right_edge=ts.right_edge,
                         banned=ts.final if ban_final else ())


def strip_running(ts: TmTileSet, n: int) -> bool:
    """The (n+1) x (n+1) strip has a final-free tiling."""
    return tile_strip(ts, n + 1, n + 1) is not None
