#!/usr/bin/env python3
"""
One-dimensional CA and their lift to the plane.

The lifted CA reads only the horizontal row through the centre of its
window, so every row of a 2D configuration evolves as an independent copy
of the 1D automaton.

Text format `ca1d v1`:

    ca1d v1
    name: rule184
    radius: 1
    quiescent: 0
    states: 0 1
    0 0 0 -> 0
    ...
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Tuple

from .errors import FormatError
from .grid import Alphabet, Window
from .rules import RULES_MAGIC, RuleTable, format_alphabet_headers

logger = logging.getLogger(__name__)

CA1D_MAGIC = "ca1d v1"

Config1D = Dict[int, str]


@dataclass(frozen=True)
class Rule1D:
    """Total 1D local rule over neighbourhoods (x_{i-r}, ..., x_{i+r})."""

    name: str
    alphabet: Alphabet
    radius: int
    table: Tuple[Tuple[Tuple[str, ...], str], ...]

    def __post_init__(self):
        mapping = dict(self.table)
        width = 2 * self.radius + 1
        expected = set(itertools.product(self.alphabet.states, repeat=width))
        if set(mapping) != expected:
            raise FormatError(f"rule {self.name} is not total over {width}-cell neighbourhoods")
        if any(out not in self.alphabet for out in mapping.values()):
            raise FormatError(f"rule {self.name} outputs an unknown state")
        q = self.alphabet.quiescent
        if mapping[(q,) * width] != q:
            raise FormatError(f"rule {self.name} is not quiescent on {q!r}")
        object.__setattr__(self, "_mapping", mapping)

    def __call__(self, neighbourhood: Tuple[str, ...]) -> str:
        return self._mapping[neighbourhood]


def _rule_from_function(name: str, states: Tuple[str, ...], radius: int, fn) -> Rule1D:
    alphabet = Alphabet(name, states, states[0])
    table = tuple((nb, fn(nb)) for nb in itertools.product(states, repeat=2 * radius + 1))
    return Rule1D(name, alphabet, radius, table)


def elementary_rule(code: int) -> Rule1D:
    """Wolfram elementary rule `code` over {0, 1}."""
    if not 0 <= code <= 255:
        raise ValueError("elementary rule codes run 0..255")
    return _rule_from_function(f"rule{code}", ("0", "1"), 1,
                               lambda nb: str((code >> int("".join(nb), 2)) & 1))


def identity_rule(states: Tuple[str, ...] = ("0", "1")) -> Rule1D:
    return _rule_from_function("identity", states, 1, lambda nb: nb[1])


def left_shift_rule(states: Tuple[str, ...] = ("0", "1")) -> Rule1D:
    """x_i <- x_{i+1}: content moves one cell to the left."""
    return _rule_from_function("left-shift", states, 1, lambda nb: nb[2])


def step_1d(x: Mapping[int, str], rule: Rule1D) -> Config1D:
    q = rule.alphabet.quiescent
    r = rule.radius
    candidates = {i + d for i in x for d in range(-r, r + 1)}
    out = {}
    for i in candidates:
        s = rule(tuple(x.get(i + d, q) for d in range(-r, r + 1)))
        if s != q:
            out[i] = s
    return out


def run_1d(x: Mapping[int, str], rule: Rule1D, t: int) -> Config1D:
    """t steps of a 1D CA over a quiescent background."""
    current = {i: s for i, s in x.items() if s != rule.alphabet.quiescent}
    for _ in range(t):
        current = step_1d(current, rule)
    return current


class LiftedRuleTable(RuleTable):
    """2D CA applying a 1D rule along each row."""

    def __init__(self, rule: Rule1D):
        super().__init__(f"lift-{rule.name}", rule.alphabet, rule.radius)
        self.rule = rule
        side = 2 * rule.radius + 1
        self._row = slice(rule.radius * side, (rule.radius + 1) * side)

    def _evaluate(self, window: Window) -> str:
        return self.rule(window[self._row])


def lift_1d_to_2d(rule: Rule1D) -> LiftedRuleTable:
    logger.debug("lifting %s (radius %d)", rule.name, rule.radius)
    return LiftedRuleTable(rule)


def _table_lines(rule: Rule1D) -> List[str]:
    return [f"{' '.join(nb)} -> {out}" for nb, out in rule.table]


def _parse_table(lines: List[str], start: int, width: int) -> List[Tuple[Tuple[str, ...], str]]:
    table = []
    for i in range(start, len(lines)):
        line = lines[i].strip()
        if not line:
            continue
        if "->" not in line:
            raise FormatError("table lines read 'a b c -> s'", line=i + 1, column=1)
        lhs, rhs = line.split("->", 1)
        nb = tuple(lhs.split())
        if len(nb) != width or len(rhs.split()) != 1:
            raise FormatError(f"table line needs {width} cells and one output", line=i + 1, column=1)
        table.append((nb, rhs.strip()))
    return table


def parse_rule_1d(text: str) -> Rule1D:
    lines = text.split("\n")
    if not lines or lines[0].strip() != CA1D_MAGIC:
        raise FormatError(f"missing '{CA1D_MAGIC}' header", line=1, column=1)
    headers: Dict[str, str] = {}
    i = 1
    while i < len(lines) and ":" in lines[i] and "->" not in lines[i]:
        key, value = lines[i].split(":", 1)
        headers[key.strip()] = value.strip()
        i += 1
    for key in ("name", "radius", "quiescent", "states"):
        if key not in headers:
            raise FormatError(f"missing '{key}:' header")
    try:
        radius = int(headers["radius"])
        alphabet = Alphabet(headers["name"], tuple(headers["states"].split()), headers["quiescent"])
    except ValueError as e:
        raise FormatError(str(e))
    return Rule1D(headers["name"], alphabet, radius, tuple(_parse_table(lines, i, 2 * radius + 1)))


def format_rule_1d(rule: Rule1D) -> str:
    lines = [CA1D_MAGIC, f"name: {rule.name}", f"radius: {rule.radius}",
             f"quiescent: {rule.alphabet.quiescent}", f"states: {' '.join(rule.alphabet.states)}"]
    return "\n".join(lines + _table_lines(rule)) + "\n"


def load_rule_1d(path: str) -> Rule1D:
    with open(path, "r", encoding="utf-8") as f:
        return parse_rule_1d(f.read())


def format_lifted_table(rt: LiftedRuleTable) -> str:
    """`ca-rules v1` text of kind lifted."""
    lines = [RULES_MAGIC, f"name: {rt.name}", "kind: lifted", f"alphabet: {rt.alphabet.name}",
             f"radius: {rt.radius}"]
    lines += format_alphabet_headers(rt.alphabet)
    lines += ["", "table:"] + _table_lines(rt.rule)
    return "\n".join(lines) + "\n"


def parse_lifted_table(headers: Dict[str, str], alphabet: Alphabet, lines: List[str], i: int) -> LiftedRuleTable:
    while i < len(lines) and not lines[i].strip():
        i += 1
    if i >= len(lines) or lines[i].strip() != "table:":
        raise FormatError("lifted rule tables need a 'table:' section", line=i + 1, column=1)
    try:
        radius = int(headers.get("radius", ""))
    except ValueError:
        raise FormatError("radius must be an integer")
    name = headers.get("name", "")
    rule_name = name[len("lift-"):] if name.startswith("lift-") else name
    rule = Rule1D(rule_name, alphabet, radius, tuple(_parse_table(lines, i + 1, 2 * radius + 1)))
    return LiftedRuleTable(rule)
