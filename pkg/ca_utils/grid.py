#!/usr/bin/env python3
"""
Grid core: configurations over Z^2, the Cantor metric, patterns and shifts.

Also owns the `ca-grid v1` text format:

    ca-grid v1
    alphabet: F
    background: 0
    origin: -1 -1
    ↘↓↙
    →1←
    ↗↑↖

Raster rows run top to bottom, `origin` is the lower-left raster cell and
`.` always stands for the background state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from .errors import AlphabetMismatchError, DimensionMismatchError, FormatError

Position = Tuple[int, int]
Window = Tuple[str, ...]

BACKGROUND_CHAR = "."
GRID_MAGIC = "ca-grid v1"


def _char_pool() -> List[str]:
    pool = [chr(c) for c in range(ord("a"), ord("z") + 1)]
    pool += [chr(c) for c in range(ord("A"), ord("Z") + 1)]
    pool += [chr(c) for c in range(ord("2"), ord("9") + 1)]
    pool += [chr(c) for c in range(0x3B1, 0x3CA)]   # greek small
    pool += [chr(c) for c in range(0x410, 0x450)]   # cyrillic
    pool += [chr(c) for c in range(0x100, 0x180)]   # latin extended-a
    return pool


CHAR_POOL = tuple(_char_pool())


def norm(p: Position) -> int:
    """Infinity norm used by the metric and by every radius."""
    return max(abs(p[0]), abs(p[1]))


def add(p: Position, q: Position) -> Position:
    return (p[0] + q[0], p[1] + q[1])


def ring(r: int) -> Iterator[Position]:
    """Positions of norm exactly r."""
    if r == 0:
        yield (0, 0)
        return
    for x in range(-r, r + 1):
        yield (x, r)
        yield (x, -r)
    for y in range(-r + 1, r):
        yield (-r, y)
        yield (r, y)


def assign_chars(states: Iterable[str]) -> Tuple[str, ...]:
    """Deterministic char map: one-char names keep themselves, others draw from CHAR_POOL."""
    states = list(states)
    taken = {s for s in states if len(s) == 1 and s != BACKGROUND_CHAR}
    pool = (c for c in CHAR_POOL if c not in taken)
    chars = []
    used = set()
    for state in states:
        if len(state) == 1 and state != BACKGROUND_CHAR and state not in used:
            ch = state
        else:
            ch = next(pool, None)
            if ch is None:
                raise ValueError("alphabet too large for the char pool")
        used.add(ch)
        chars.append(ch)
    return tuple(chars)


@dataclass(frozen=True)
class Alphabet:
    """Ordered state set with named classes and a printable char per state."""

    name: str
    states: Tuple[str, ...]
    quiescent: str
    classes: Tuple[Tuple[str, FrozenSet[str]], ...] = field(default=(), compare=False)
    chars: Tuple[str, ...] = ()

    def __post_init__(self):
        if len(set(self.states)) != len(self.states):
            raise ValueError(f"alphabet {self.name}: duplicate states")
        if self.quiescent not in self.states:
            raise ValueError(f"alphabet {self.name}: quiescent state {self.quiescent!r} not in states")
        for class_name, members in self.classes:
            if not members <= set(self.states):
                raise ValueError(f"alphabet {self.name}: class {class_name} is not a subset of the states")
        if not self.chars:
            object.__setattr__(self, "chars", assign_chars(self.states))
        if len(self.chars) != len(self.states) or len(set(self.chars)) != len(self.chars):
            raise ValueError(f"alphabet {self.name}: char map must be a bijection")
        if BACKGROUND_CHAR in self.chars:
            raise ValueError(f"alphabet {self.name}: '{BACKGROUND_CHAR}' is reserved")
        object.__setattr__(self, "_state_to_char", dict(zip(self.states, self.chars)))
        object.__setattr__(self, "_char_to_state", dict(zip(self.chars, self.states)))
        object.__setattr__(self, "_state_set", frozenset(self.states))

    def __contains__(self, state: str) -> bool:
        return state in self._state_set

    def state_class(self, class_name: str) -> FrozenSet[str]:
        for name, members in self.classes:
            if name == class_name:
                return members
        raise KeyError(class_name)

    def char_of(self, state: str) -> str:
        return self._state_to_char[state]

    def state_of(self, ch: str) -> Optional[str]:
        return self._char_to_state.get(ch)


class Configuration:
    """Finite-support configuration over a uniform background; immutable.

    Support entries never hold the background state, so equality is plain
    structural equality.
    """

    __slots__ = ("alphabet", "background", "_cells", "_hash")

    def __init__(self, alphabet: Alphabet, cells: Optional[Mapping[Position, str]] = None,
                 background: Optional[str] = None):
        self.alphabet = alphabet
        self.background = alphabet.quiescent if background is None else background
        if self.background not in alphabet:
            raise AlphabetMismatchError(f"background {self.background!r} not in alphabet {alphabet.name}")
        canonical: Dict[Position, str] = {}
        for pos, state in (cells or {}).items():
            if state not in alphabet:
                raise AlphabetMismatchError(f"state {state!r} at {pos} not in alphabet {alphabet.name}")
            if state != self.background:
                canonical[(int(pos[0]), int(pos[1]))] = state
        self._cells = canonical
        self._hash = None

    # read access

    def __getitem__(self, pos: Position) -> str:
        return self._cells.get(pos, self.background)

    def get(self, pos: Position) -> str:
        return self._cells.get(pos, self.background)

    def items(self):
        return self._cells.items()

    def support(self) -> FrozenSet[Position]:
        return frozenset(self._cells)

    def cells(self) -> Dict[Position, str]:
        """A fresh, mutable copy of the support map."""
        return dict(self._cells)

    def __len__(self) -> int:
        return len(self._cells)

    def is_finite(self) -> bool:
        return self.background == self.alphabet.quiescent

    def positions_with(self, states: Iterable[str]) -> List[Position]:
        wanted = set(states)
        return sorted(p for p, s in self._cells.items() if s in wanted)

    def bounding_box(self) -> Optional[Tuple[int, int, int, int]]:
        """(min_x, min_y, max_x, max_y) of the support, None when empty."""
        if not self._cells:
            return None
        xs = [p[0] for p in self._cells]
        ys = [p[1] for p in self._cells]
        return (min(xs), min(ys), max(xs), max(ys))

    def max_norm(self) -> int:
        return max((norm(p) for p in self._cells), default=0)

    # derived configurations

    def with_cells(self, updates: Mapping[Position, str]) -> "Configuration":
        cells = dict(self._cells)
        cells.update(updates)
        return Configuration(self.alphabet, cells, self.background)

    def truncate(self, radius: int) -> "Configuration":
        """Keep the cells of norm <= radius, quiescent everywhere else.

        Works for any background: a uniform non-quiescent background is
        written out explicitly inside the ball.
        """
        q = self.alphabet.quiescent
        cells = {}
        for x in range(-radius, radius + 1):
            for y in range(-radius, radius + 1):
                state = self.get((x, y))
                if state != q:
                    cells[(x, y)] = state
        return Configuration(self.alphabet, cells, q)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return (self.alphabet == other.alphabet and self.background == other.background
                and self._cells == other._cells)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.alphabet.name, self.background, frozenset(self._cells.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Configuration({self.alphabet.name}, background={self.background!r}, cells={len(self._cells)})"


@dataclass(frozen=True)
class Wildcard:
    """Pattern cell standing for any state of a class."""

    name: str
    states: FrozenSet[str]

    def __post_init__(self):
        if not self.states:
            raise ValueError(f"wildcard {self.name} has an empty class")

    def admits(self, state: str) -> bool:
        return state in self.states


Cell = Union[str, Wildcard]


@dataclass(frozen=True)
class Pattern:
    """w x h block of cells, row-major with the top row first."""

    width: int
    height: int
    cells: Tuple[Cell, ...]

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("pattern dimensions must be positive")
        if len(self.cells) != self.width * self.height:
            raise ValueError(f"pattern needs {self.width * self.height} cells, got {len(self.cells)}")

    @classmethod
    def from_rows(cls, rows: List[List[Cell]]) -> "Pattern":
        """Build from rows listed top to bottom."""
        return cls(len(rows[0]), len(rows), tuple(c for row in rows for c in row))

    def at(self, dx: int, dy: int) -> Cell:
        """Cell at column dx, row dy counted from the bottom."""
        return self.cells[(self.height - 1 - dy) * self.width + dx]

    def rows(self) -> List[Tuple[Cell, ...]]:
        return [self.cells[r * self.width:(r + 1) * self.width] for r in range(self.height)]

    def is_concrete(self) -> bool:
        return all(isinstance(c, str) for c in self.cells)

    def sort_key(self) -> Tuple[str, ...]:
        return tuple(c if isinstance(c, str) else "\x00" + c.name for c in self.cells)


@total_ordering
@dataclass(frozen=True)
class Dyadic:
    """Exact value 2^-exponent, or zero when exponent is None."""

    exponent: Optional[int]

    @classmethod
    def power(cls, k: int) -> "Dyadic":
        return cls(k)

    @classmethod
    def zero(cls) -> "Dyadic":
        return cls(None)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        text = text.strip().replace(" ", "")
        if text == "0":
            return cls.zero()
        if text.startswith("2^"):
            return cls(-int(text[2:]))
        value = Fraction(text)
        k = 0
        while value < 1:
            value *= 2
            k += 1
        if value != 1:
            raise ValueError(f"{text} is not a power of two")
        return cls(k)

    def is_zero(self) -> bool:
        return self.exponent is None

    def as_fraction(self) -> Fraction:
        if self.exponent is None:
            return Fraction(0)
        return Fraction(1, 2 ** self.exponent) if self.exponent >= 0 else Fraction(2 ** -self.exponent)

    def _key(self) -> Tuple[int, int]:
        return (0, 0) if self.exponent is None else (1, -self.exponent)

    def __lt__(self, other: "Dyadic") -> bool:
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self._key() < other._key()

    def __str__(self) -> str:
        return "0" if self.exponent is None else f"2^-{self.exponent}"


def cantor_distance(x: Configuration, y: Configuration) -> Dyadic:
    """d(x,y) = 2^-k with k the norm of the nearest disagreement, 0 when equal."""
    if x.alphabet != y.alphabet:
        raise AlphabetMismatchError(f"cannot compare {x.alphabet.name} with {y.alphabet.name}")
    if x.background == y.background:
        k = min((norm(p) for p in x.support() | y.support() if x[p] != y[p]), default=None)
        return Dyadic.zero() if k is None else Dyadic.power(k)
    # different uniform backgrounds: some ring past both supports disagrees
    limit = max(x.max_norm(), y.max_norm()) + 1
    for r in range(limit + 1):
        if any(x[p] != y[p] for p in ring(r)):
            return Dyadic.power(r)
    return Dyadic.power(limit)


def shift(x: Configuration, m: Position) -> Configuration:
    """(sigma^m x)(z) = x(z + m)."""
    return Configuration(x.alphabet, {(p[0] - m[0], p[1] - m[1]): s for p, s in x.items()}, x.background)


def extract(x: Configuration, origin: Position, w: int, h: int) -> Pattern:
    """Concrete w x h pattern whose lower-left corner is origin."""
    if w < 1 or h < 1:
        raise ValueError("window dimensions must be positive")
    ox, oy = origin
    rows = [[x[(ox + dx, oy + dy)] for dx in range(w)] for dy in range(h - 1, -1, -1)]
    return Pattern.from_rows(rows)


def pattern_matches(p: Pattern, q: Pattern) -> bool:
    """True iff every cell of q fits the corresponding (possibly wildcard) cell of p."""
    if (p.width, p.height) != (q.width, q.height):
        raise DimensionMismatchError(f"{p.width}x{p.height} vs {q.width}x{q.height}")
    for a, b in zip(p.cells, q.cells):
        if isinstance(b, Wildcard):
            # a wildcard in q matches only an identical wildcard in p
            if a != b:
                return False
        elif isinstance(a, Wildcard):
            if not a.admits(b):
                return False
        elif a != b:
            return False
    return True


def window_offsets(radius: int) -> Tuple[Position, ...]:
    """Offsets of a (2r+1)^2 window, row-major from the top row."""
    return tuple((dx, dy) for dy in range(radius, -radius - 1, -1) for dx in range(-radius, radius + 1))


def window_at(get: Callable[[Position], str], center: Position, offsets: Tuple[Position, ...]) -> Window:
    cx, cy = center
    return tuple(get((cx + dx, cy + dy)) for dx, dy in offsets)


# ca-grid v1


def format_grid(x: Configuration) -> str:
    """Canonical ca-grid v1 text: tight raster around the support."""
    alphabet = x.alphabet
    lines = [GRID_MAGIC, f"alphabet: {alphabet.name}", f"background: {alphabet.char_of(x.background)}"]
    box = x.bounding_box()
    if box is None:
        lines.append("origin: 0 0")
    else:
        x0, y0, x1, y1 = box
        lines.append(f"origin: {x0} {y0}")
        for yy in range(y1, y0 - 1, -1):
            row = []
            for xx in range(x0, x1 + 1):
                state = x[(xx, yy)]
                row.append(BACKGROUND_CHAR if state == x.background else alphabet.char_of(state))
            lines.append("".join(row))
    return "\n".join(lines) + "\n"


def _header(lines: List[str], index: int, key: str) -> str:
    if index >= len(lines) or not lines[index].startswith(key + ":"):
        raise FormatError(f"expected '{key}:' header", line=index + 1, column=1)
    return lines[index][len(key) + 1:].strip()


def parse_grid(text: str, alphabet: Alphabet) -> Configuration:
    """Parse ca-grid v1 text over the given alphabet."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != GRID_MAGIC:
        raise FormatError(f"missing '{GRID_MAGIC}' header", line=1, column=1)
    name = _header(lines, 1, "alphabet")
    if name != alphabet.name:
        raise AlphabetMismatchError(f"grid uses alphabet {name!r}, rules use {alphabet.name!r}")
    bg_char = _header(lines, 2, "background")
    background = alphabet.state_of(bg_char)
    if background is None:
        raise FormatError(f"unknown background char {bg_char!r}", line=3, column=13)
    origin_fields = _header(lines, 3, "origin").split()
    try:
        x0, y0 = int(origin_fields[0]), int(origin_fields[1])
        if len(origin_fields) != 2:
            raise ValueError
    except (ValueError, IndexError):
        raise FormatError("origin needs two integers", line=4, column=9)
    raster = lines[4:]
    cells: Dict[Position, str] = {}
    width = len(raster[0]) if raster else 0
    for r, row in enumerate(raster):
        line_no = 5 + r
        if len(row) != width:
            raise FormatError(f"raster row has {len(row)} chars, expected {width}", line=line_no, column=1)
        yy = y0 + len(raster) - 1 - r
        for c, ch in enumerate(row):
            if ch == BACKGROUND_CHAR:
                continue
            state = alphabet.state_of(ch)
            if state is None:
                raise FormatError(f"unknown state char {ch!r}", line=line_no, column=c + 1)
            cells[(x0 + c, yy)] = state
    return Configuration(alphabet, cells, background)
