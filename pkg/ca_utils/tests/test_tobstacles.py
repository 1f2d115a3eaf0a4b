#!/usr/bin/env python3
"""
Unit tests for T-obstacles and the tile-set compiler.
"""

import unittest

# Add parent directory to path to import ca_utils
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from ca_utils import format_compiled, parse_compiled, phi4, step, t_obstacle
from ca_utils.analysis import fixed_t_obstacle_sides
from ca_utils.tiling import counter_tile_set, greedy_tiling, single_tile_set
from ca_utils.tobstacles import (DASH, e_state, e_support, onion, onion_patterns, outside_offsets, split_e,
                                 t_obstacle_cells, x_layer, x_pairs)


class TestOnion(unittest.TestCase):
    """The arrow layer of T-obstacles."""

    def test_side_seven(self):
        """Corners, edges and the centre of a side-7 onion."""
        cells = onion(7)
        self.assertEqual(cells[(0, 6)], "↘")
        self.assertEqual(cells[(6, 6)], "↙")
        self.assertEqual(cells[(0, 0)], "↗")
        self.assertEqual(cells[(6, 0)], "↖")
        self.assertEqual(cells[(3, 0)], "↑")
        self.assertEqual(cells[(0, 3)], "→")
        self.assertEqual(cells[(3, 3)], DASH)
        self.assertEqual(sum(1 for a in cells.values() if a == DASH), 1)

    def test_even_centre(self):
        """Even sides have a 2x2 centre block."""
        cells = onion(8)
        self.assertEqual([p for p, a in cells.items() if a == DASH], [(3, 3), (3, 4), (4, 3), (4, 4)])

    def test_patterns(self):
        """The 2x2 patterns include the even centre and give its pairs."""
        patterns = onion_patterns()
        self.assertIn((DASH, DASH, DASH, DASH), patterns)
        h, v = x_pairs(patterns)
        self.assertIn(("→", DASH), h)
        self.assertIn(("↑", DASH), v)
        self.assertNotIn(("←", "→"), h)

    def test_outside_offsets(self):
        """Outside neighbours lie against the arrow."""
        self.assertEqual(outside_offsets("↘"), frozenset({(-1, 0), (0, 1)}))
        self.assertEqual(outside_offsets("↑"), frozenset({(0, -1)}))
        self.assertEqual(outside_offsets(DASH), frozenset())

    def test_state_names(self):
        """E states join tile and arrow with a slash."""
        self.assertEqual(e_state("c01", "↗"), "c01/↗")
        self.assertEqual(split_e("c01/↗"), ("c01", "↗"))


class TestTObstacles(unittest.TestCase):
    """Fixed and eroding T-obstacles."""

    def test_valid_squares_fixed(self):
        """Single-tile squares of sides 3 to 21 do not move."""
        ca = phi4(single_tile_set())
        for side in range(3, 22):
            x = t_obstacle(ca, [["t"] * side for _ in range(side)], (-side // 2, 1))
            self.assertEqual(step(x, ca.rule_table), x, f"side {side}")

    def test_layers(self):
        """e_support and x_layer read back the square."""
        ca = phi4(single_tile_set())
        x = t_obstacle(ca, [["t"] * 3 for _ in range(3)])
        self.assertEqual(len(e_support(x)), 9)
        self.assertEqual(x_layer(x)[(1, 1)], DASH)

    def test_invalid_tiling_erodes(self):
        """A 7x7 counter4 filling breaks a domino and is not fixed."""
        ts = counter_tile_set(4)
        ca = phi4(ts)
        x = t_obstacle(ca, greedy_tiling(ts, 7, 7))
        after = step(x, ca.rule_table)
        self.assertNotEqual(after, x)
        self.assertLess(len(after), len(x))

    def test_invalid_squares_erode_away(self):
        """Greedy counter4 squares of sides 7 to 11 lose E cells every step until none are left."""
        ts = counter_tile_set(4)
        ca = phi4(ts)
        for side in range(7, 12):
            x = t_obstacle(ca, greedy_tiling(ts, side, side))
            sizes = [len(e_support(x))]
            while sizes[-1] and len(sizes) <= side * side:
                x = step(x, ca.rule_table)
                sizes.append(len(e_support(x)))
            self.assertEqual(sizes[0], side * side)
            self.assertEqual(sizes[-1], 0, f"side {side}: {sizes}")
            self.assertTrue(all(a > b for a, b in zip(sizes, sizes[1:])), f"side {side}: {sizes}")

    def test_particle_passes_fixed_square(self):
        """A particle running past a fixed 7x7 square leaves it intact."""
        ca = phi4(single_tile_set())
        x = t_obstacle(ca, [["t"] * 7 for _ in range(7)])
        y = x.with_cells({(12, 4): "U", (12, 3): "D"})
        for _ in range(40):
            y = step(y, ca.rule_table)
        self.assertTrue(all(y[p] == s for p, s in x.items()))

    def test_fixed_sides_follow_tilability(self):
        """counter4 gives fixed squares exactly up to side 4."""
        fixed, failed = fixed_t_obstacle_sides(phi4(counter_tile_set(4)), 6)
        self.assertEqual(fixed, [3, 4])
        self.assertEqual(failed, [5, 6])

    def test_square_required(self):
        """T-obstacle tilings must be square."""
        with self.assertRaises(ValueError):
            t_obstacle_cells([["t", "t"]])

    def test_round_trip(self):
        """phi4 text recompiles from the embedded tile set."""
        text = format_compiled(phi4(counter_tile_set(4)))
        self.assertIn("provenance: phi4\n", text)
        self.assertEqual(format_compiled(parse_compiled(text)), text)


if __name__ == '__main__':
    unittest.main()
