#!/usr/bin/env python3
"""
Unit tests for Turing machines, tile sets and bounded tiling search.
"""

import unittest

# Add parent directory to path to import ca_utils
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from ca_utils import TileSet, parse_tileset, parse_tm, run_tm, tiles_square, tm_to_tileset
from ca_utils.errors import FormatError, TilingError, TuringMachineError
from ca_utils.tiling import check_tiling, counter_tile_set, format_tileset, greedy_tiling, single_tile_set
from ca_utils.turing import format_tm, same_config, strip_running, tile_strip

BUSY3 = """tm v1
name: busy3
initial: a
final: h
blank: 0
a 0 -> b 1 R
a 1 -> h 1 R
b 0 -> c 0 R
b 1 -> b 1 R
c 0 -> c 1 L
c 1 -> a 1 L
"""

LOOP = "tm v1\nname: loop\ninitial: a\nfinal: h\nblank: 0\na 0 -> a 0 L\n"
HALT_NOW = "tm v1\nname: halt-now\ninitial: a\nfinal: h\nblank: 0\na 0 -> h 0 R\n"

CHECKER = "tiles v1\nname: checker\ntiles: a b\nh: a b\nh: b a\nv: a b\nv: b a\n"


class TestTuringMachines(unittest.TestCase):
    """Parsing and running machines."""

    def test_busy3_halts_at_six(self):
        """busy3 reaches h after six transitions."""
        result = run_tm(parse_tm(BUSY3), 20)
        self.assertTrue(result.halted)
        self.assertEqual(result.halting_step, 6)
        self.assertEqual(result.trace[-1].tape, ("1", "1", "1"))

    def test_loop_never_halts(self):
        """A left move on cell 0 keeps the head on cell 0."""
        result = run_tm(parse_tm(LOOP), 50)
        self.assertFalse(result.halted)
        self.assertIsNone(result.halting_step)
        self.assertTrue(all(c.head == 0 for c in result.trace))
        self.assertEqual(len(result.trace), 51)

    def test_canonical_text(self):
        """Canonical machine text prints back unchanged."""
        self.assertEqual(format_tm(parse_tm(BUSY3)), BUSY3)

    def test_comments_are_skipped(self):
        """# lines are ignored."""
        m = parse_tm(HALT_NOW.replace("blank: 0\n", "blank: 0\n# one step\n"))
        self.assertEqual(run_tm(m, 5).halting_step, 1)

    def test_partial_machine(self):
        """Missing transitions are refused."""
        with self.assertRaises(FormatError):
            parse_tm("tm v1\ninitial: a\nfinal: h\nblank: 0\na 0 -> h 1 R\n")

    def test_bad_transition_line(self):
        """Malformed transitions name their line."""
        with self.assertRaises(FormatError) as ctx:
            parse_tm("tm v1\ninitial: a\nfinal: h\nblank: 0\na 0 -> h 0\n")
        self.assertEqual(ctx.exception.line, 5)

    def test_negative_budget(self):
        """Step budgets cannot be negative."""
        with self.assertRaises(TuringMachineError):
            run_tm(parse_tm(LOOP), -1)


class TestMachineTilings(unittest.TestCase):
    """Seeded strips encode space-time diagrams."""

    def test_strip_running_matches_simulation(self):
        """The strip tiles exactly while the machine has not halted."""
        m = parse_tm(BUSY3)
        ts = tm_to_tileset(m)
        for n in range(16):
            self.assertEqual(strip_running(ts, n), not run_tm(m, n).halted, f"n={n}")

    def test_rows_decode_to_trace(self):
        """Row t of a strip decodes to the configuration at time t."""
        m = parse_tm(BUSY3)
        ts = tm_to_tileset(m)
        rows = tile_strip(ts, 6, 6)
        trace = run_tm(m, 5).trace
        for t, row in enumerate(rows):
            self.assertTrue(same_config(ts.decode_row(row), trace[t], m.blank), f"t={t}")

    def test_loop_strips_always_tile(self):
        """A machine that never halts tiles every strip up to n = 30."""
        ts = tm_to_tileset(parse_tm(LOOP))
        for n in range(31):
            self.assertTrue(strip_running(ts, n), f"n={n}")

    def test_immediate_halt(self):
        """Only the seed row survives for a machine halting at step 1."""
        ts = tm_to_tileset(parse_tm(HALT_NOW))
        self.assertTrue(strip_running(ts, 0))
        self.assertFalse(strip_running(ts, 1))
        self.assertIsNotNone(tile_strip(ts, 2, 2, ban_final=False))

    def test_immediate_halt_tall_strips(self):
        """No final-free strip exists for a machine halting at step 1, up to n = 30."""
        ts = tm_to_tileset(parse_tm(HALT_NOW))
        for n in range(1, 31):
            self.assertFalse(strip_running(ts, n), f"n={n}")

    def test_tile_set_name(self):
        """Tile sets are named after the machine."""
        self.assertEqual(tm_to_tileset(parse_tm(LOOP)).tileset.name, "tm-loop")


class TestTileSets(unittest.TestCase):
    """Square tilings."""

    def test_single_tile(self):
        """One tile with every domino tiles every square."""
        for n in range(1, 6):
            result = tiles_square(single_tile_set(), n)
            self.assertTrue(result.tilable)
            self.assertEqual(result.witness, [["t"] * n for _ in range(n)])

    def test_no_horizontal_pairs(self):
        """Without horizontal dominoes only 1x1 tiles."""
        ts = TileSet("columns", ("a", "b"), frozenset(), frozenset({("a", "a"), ("b", "b")}))
        self.assertTrue(tiles_square(ts, 1).tilable)
        self.assertFalse(tiles_square(ts, 2).tilable)
        self.assertIsNone(tiles_square(ts, 2).witness)

    def test_checker(self):
        """The checkerboard witness starts with the first tile."""
        ts = parse_tileset(CHECKER)
        result = tiles_square(ts, 4)
        self.assertTrue(check_tiling(ts, result.witness))
        self.assertEqual(result.witness[0], ["a", "b", "a", "b"])
        self.assertEqual(result.witness[1], ["b", "a", "b", "a"])

    def test_counter_bound(self):
        """counter4 tiles 4x4 but not 5x5."""
        ts = counter_tile_set(4)
        self.assertTrue(tiles_square(ts, 4).tilable)
        self.assertFalse(tiles_square(ts, 5).tilable)

    def test_greedy_on_checker(self):
        """Greedy filling of the checkerboard is valid."""
        ts = parse_tileset(CHECKER)
        self.assertTrue(check_tiling(ts, greedy_tiling(ts, 5, 3)))

    def test_bad_size(self):
        """Squares need a positive side."""
        with self.assertRaises(TilingError):
            tiles_square(single_tile_set(), 0)

    def test_canonical_text(self):
        """Canonical tile-set text prints back unchanged."""
        self.assertEqual(format_tileset(parse_tileset(CHECKER)), CHECKER)

    def test_unknown_tile_in_pair(self):
        """Pairs must reference declared tiles."""
        with self.assertRaises(FormatError):
            parse_tileset("tiles v1\ntiles: a\nh: a z\n")

    def test_short_pair(self):
        """Pairs need two tiles; the column points past the key."""
        with self.assertRaises(FormatError) as ctx:
            parse_tileset("tiles v1\ntiles: a\nv: a\n")
        self.assertEqual((ctx.exception.line, ctx.exception.column), (3, 4))


if __name__ == '__main__':
    unittest.main()
