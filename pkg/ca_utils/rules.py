#!/usr/bin/env python3
"""
Rule tables and the `ca-rules v1` format.

A rule table of the obstacle/particle family evaluates a 5x5 window in
three cases:

1. the 3x3 window around the centre (or, with any-window scope, any 3x3
   window containing it) is forbidden by the obstacle library -> 0
2. the first guarded 3x3 rewrite that matches -> its output
3. otherwise -> the default state (0)

Rewrite guards use `A` for the obstacle class, `*` for its complement and
`x` for a centre in A that is kept unchanged; `a|b` lists alternatives.
"""

import logging
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .errors import FormatError
from .grid import Alphabet, Window, window_offsets
from .sft import OBSTACLE_STATES, PatternLibrary, default_sigma_af

logger = logging.getLogger(__name__)

RULES_MAGIC = "ca-rules v1"
VIOLATION_SCOPES = ("center-window", "any-window")
F_RULES_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "f_rules.ca")
KEEP = "x"


class RuleTable(ABC):
    """A 2D CA: alphabet, radius and a total local rule over (2r+1)^2 windows."""

    def __init__(self, name: str, alphabet: Alphabet, radius: int):
        if radius < 1:
            raise ValueError("radius must be at least 1")
        self.name = name
        self.alphabet = alphabet
        self.radius = radius
        self.offsets = window_offsets(radius)
        self.local = lru_cache(maxsize=65536)(self._evaluate)

    @property
    def quiescent(self) -> str:
        return self.alphabet.quiescent

    @abstractmethod
    def _evaluate(self, window: Window) -> str:
        """Local rule on a window listed row-major from the top."""

    def is_quiescent(self) -> bool:
        return self.local((self.quiescent,) * len(self.offsets)) == self.quiescent


def _rotate(rows: Tuple[Tuple[str, ...], ...]) -> Tuple[Tuple[str, ...], ...]:
    """Quarter turn clockwise."""
    return tuple(tuple(rows[2 - c][r] for c in range(3)) for r in range(3))


@dataclass(frozen=True)
class RuleBlock:
    """One printed rule: 3x3 guard tokens, top row first."""

    number: int
    rows: Tuple[Tuple[str, ...], ...]
    output: str
    rotate: bool = False

    def orientations(self) -> List[Tuple[Tuple[str, ...], ...]]:
        if not self.rotate:
            return [self.rows]
        found, rows = [], self.rows
        for _ in range(4):
            if rows not in found:
                found.append(rows)
            rows = _rotate(rows)
        return found


@dataclass(frozen=True)
class Rewrite:
    """Expanded guard: allowed states per 3x3 cell; output None keeps the centre."""

    number: int
    guard: Tuple[FrozenSet[str], ...]
    output: Optional[str]

    def matches(self, cells: Window) -> bool:
        return all(s in allowed for s, allowed in zip(cells, self.guard))


def _idx5(dx: int, dy: int) -> int:
    return (2 - dy) * 5 + dx + 2


_CENTER_3X3 = tuple(_idx5(dx, dy) for dy in (1, 0, -1) for dx in (-1, 0, 1))
_ALL_3X3 = tuple(
    tuple(_idx5(cx + dx, cy + dy) for dy in (1, 0, -1) for dx in (-1, 0, 1))
    for cy in (1, 0, -1) for cx in (-1, 0, 1))


class ObstacleRuleTable(RuleTable):
    """Radius-2 CA of the obstacle/particle family (F and its compiled variants)."""

    def __init__(self, name: str, alphabet: Alphabet, library: PatternLibrary,
                 obstacle_class: FrozenSet[str], rules: Sequence[RuleBlock],
                 violation_scope: str = "center-window", min_interior: int = 1,
                 default: Optional[str] = None):
        super().__init__(name, alphabet, 2)
        if violation_scope not in VIOLATION_SCOPES:
            raise ValueError(f"unknown violation scope {violation_scope!r}")
        self.library = library
        self.obstacle_class = frozenset(obstacle_class)
        self.rules = tuple(rules)
        self.violation_scope = violation_scope
        self.min_interior = min_interior
        self.default = alphabet.quiescent if default is None else default
        self.rewrites = self._expand()
        self._windows = (_CENTER_3X3,) if violation_scope == "center-window" else _ALL_3X3

    def _classes(self) -> Dict[str, FrozenSet[str]]:
        classes = {name: members for name, members in self.alphabet.classes}
        everything = frozenset(self.alphabet.states)
        classes.update({"A": self.obstacle_class, KEEP: self.obstacle_class, "*": everything - self.obstacle_class})
        return classes

    def token_states(self, token: str) -> FrozenSet[str]:
        classes = self._classes()
        states = set()
        for part in token.split("|"):
            if part in classes:
                states |= classes[part]
            elif part in self.alphabet:
                states.add(part)
            else:
                raise FormatError(f"unknown guard token {part!r}")
        return frozenset(states)

    def _expand(self) -> Tuple[Rewrite, ...]:
        rewrites = []
        for block in self.rules:
            keep = block.output == KEEP
            if not keep and block.output not in self.alphabet:
                raise FormatError(f"rule {block.number}: unknown output {block.output!r}")
            for rows in block.orientations():
                guard = tuple(self.token_states(tok) for row in rows for tok in row)
                rewrites.append(Rewrite(block.number, guard, None if keep else block.output))
        return tuple(rewrites)

    def forbidden(self, window: Window) -> bool:
        """Case 1: the centre sees a window the obstacle library forbids."""
        contains = self.library.contains
        return any(not contains(tuple(window[i] for i in idx)) for idx in self._windows)

    def rewrite(self, window: Window) -> Optional[str]:
        """Case 2: output of the first matching rewrite, None when nothing matches."""
        cells = tuple(window[i] for i in _CENTER_3X3)
        for rw in self.rewrites:
            if rw.matches(cells):
                return cells[4] if rw.output is None else rw.output
        return None

    def _evaluate(self, window: Window) -> str:
        if self.forbidden(window):
            return self.quiescent
        out = self.rewrite(window)
        return self.default if out is None else out


def _tokens(line: str) -> List[str]:
    return line.split()


def parse_headers(lines: List[str], start: int) -> Tuple[Dict[str, str], List[Tuple[str, str]], int]:
    headers: Dict[str, str] = {}
    classes: List[Tuple[str, str]] = []
    i = start
    while i < len(lines) and lines[i].strip():
        line = lines[i]
        if ":" not in line:
            raise FormatError("expected 'key: value' header", line=i + 1, column=1)
        key, value = line.split(":", 1)
        key = key.strip()
        if key.startswith("class "):
            classes.append((key[len("class "):].strip(), value.strip()))
        elif key in headers:
            raise FormatError(f"duplicate header {key!r}", line=i + 1, column=1)
        else:
            headers[key] = value.strip()
        i += 1
    return headers, classes, i


def _require(headers: Dict[str, str], key: str) -> str:
    if key not in headers:
        raise FormatError(f"missing '{key}:' header")
    return headers[key]


def parse_alphabet(headers: Dict[str, str], classes: List[Tuple[str, str]]) -> Alphabet:
    states = tuple(_tokens(_require(headers, "states")))
    chars = tuple(_tokens(headers.get("chars", "")))
    parsed = tuple((name, frozenset(_tokens(members))) for name, members in classes)
    try:
        return Alphabet(_require(headers, "alphabet"), states, _require(headers, "quiescent"),
                        classes=parsed, chars=chars)
    except ValueError as e:
        raise FormatError(str(e))


def _parse_rule_blocks(lines: List[str], i: int) -> Tuple[List[RuleBlock], int]:
    blocks = []
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        if not line.startswith("rule "):
            break
        fields = line.split()
        try:
            number = int(fields[1])
        except (IndexError, ValueError):
            raise FormatError("rule header needs a number", line=i + 1, column=6)
        rotate = len(fields) > 2 and fields[2] == "rotate"
        if len(fields) > 3 or (len(fields) == 3 and not rotate):
            raise FormatError(f"unexpected rule flags {' '.join(fields[2:])!r}", line=i + 1, column=1)
        rows = []
        for r in range(3):
            row = _tokens(lines[i + 1 + r]) if i + 1 + r < len(lines) else []
            if len(row) != 3:
                raise FormatError("guard rows need three tokens", line=i + 2 + r, column=1)
            rows.append(tuple(row))
        out_line = lines[i + 4].strip() if i + 4 < len(lines) else ""
        if not out_line.startswith("->"):
            raise FormatError("expected '-> output'", line=i + 5, column=1)
        blocks.append(RuleBlock(number, tuple(rows), out_line[2:].strip(), rotate))
        i += 5
    return blocks, i


def parse_rule_table(text: str) -> RuleTable:
    """Parse `ca-rules v1` text.

    Files carrying a `provenance:` header are recompiled from their
    embedded source so the result is the full compiled CA.
    """
    lines = text.split("\n")
    if not lines or lines[0].strip() != RULES_MAGIC:
        raise FormatError(f"missing '{RULES_MAGIC}' header", line=1, column=1)
    headers, classes, i = parse_headers(lines, 1)
    if "provenance" in headers:
        from .compilers import compile_from_rules_text
        return compile_from_rules_text(headers, lines, i).rule_table
    kind = _require(headers, "kind")
    alphabet = parse_alphabet(headers, classes)
    if kind == "lifted":
        from .lift import parse_lifted_table
        return parse_lifted_table(headers, alphabet, lines, i)
    if kind != "obstacle":
        raise FormatError(f"unknown rule kind {kind!r}", line=3)
    if _require(headers, "radius") != "2":
        raise FormatError("obstacle rule tables have radius 2")
    library_name = _require(headers, "library")
    try:
        min_interior = int(headers.get("min-interior", "1"))
    except ValueError:
        raise FormatError("min-interior must be an integer")
    if library_name not in ("sigma-af", f"sigma-af-min{min_interior}"):
        raise FormatError(f"library {library_name!r} needs a provenance header to be rebuilt")
    blocks, end = _parse_rule_blocks(lines, i)
    if any(line.strip() for line in lines[end:]):
        raise FormatError("unexpected text after the rules", line=end + 1, column=1)
    obstacle_class = alphabet.state_class("A") if any(n == "A" for n, _ in alphabet.classes) else OBSTACLE_STATES
    return ObstacleRuleTable(
        _require(headers, "name"), alphabet, default_sigma_af(min_interior), obstacle_class, blocks,
        violation_scope=headers.get("violation-scope", "center-window"), min_interior=min_interior,
        default=headers.get("default"))


def format_alphabet_headers(alphabet: Alphabet) -> List[str]:
    lines = [f"quiescent: {alphabet.quiescent}",
             f"states: {' '.join(alphabet.states)}",
             f"chars: {' '.join(alphabet.chars)}"]
    for name, members in alphabet.classes:
        if name not in ("*", KEEP):
            lines.append(f"class {name}: {' '.join(s for s in alphabet.states if s in members)}")
    return lines


def format_rule_blocks(blocks: Sequence[RuleBlock]) -> List[str]:
    lines = []
    for block in blocks:
        lines.append("")
        lines.append(f"rule {block.number}" + (" rotate" if block.rotate else ""))
        width = max(len(tok) for row in block.rows for tok in row)
        for row in block.rows:
            lines.append(" ".join(tok.ljust(width) for tok in row).rstrip())
        lines.append(f"-> {block.output}")
    return lines


def format_rule_table(rt: ObstacleRuleTable, extra_headers: Sequence[str] = ()) -> str:
    """Deterministic `ca-rules v1` text for an obstacle rule table."""
    lines = [RULES_MAGIC, f"name: {rt.name}", "kind: obstacle"]
    lines += list(extra_headers)
    lines += [f"alphabet: {rt.alphabet.name}", f"radius: {rt.radius}"]
    lines += format_alphabet_headers(rt.alphabet)
    lines += [f"library: {rt.library.name}",
              f"min-interior: {rt.min_interior}",
              f"violation-scope: {rt.violation_scope}",
              f"default: {rt.default}"]
    lines += format_rule_blocks(rt.rules)
    return "\n".join(lines) + "\n"


def load_rule_table(path: str) -> RuleTable:
    with open(path, "r", encoding="utf-8") as f:
        return parse_rule_table(f.read())


@lru_cache(maxsize=8)
def f_automaton(violation_scope: str = "center-window", min_interior: int = 1) -> ObstacleRuleTable:
    """The 12-state automaton F from the committed rule list."""
    rt = load_rule_table(F_RULES_PATH)
    if (violation_scope, min_interior) == (rt.violation_scope, rt.min_interior):
        return rt
    return ObstacleRuleTable(rt.name, rt.alphabet, default_sigma_af(min_interior), rt.obstacle_class,
                             rt.rules, violation_scope, min_interior, rt.default)


def local_rule_f(window: Window) -> str:
    """Local rule of F on a concrete 5x5 window (row-major, top row first)."""
    if len(window) != 25:
        raise ValueError("F reads 5x5 windows")
    return f_automaton().local(tuple(window))
