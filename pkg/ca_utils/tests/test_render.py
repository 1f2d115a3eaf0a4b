#!/usr/bin/env python3
"""
Unit tests for ASCII and PPM rendering.
"""

import unittest

# Add parent directory to path to import ca_utils
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from ca_utils import Configuration, F_ALPHABET, obstacle_configuration
from ca_utils.render import (BLUE, LIGHT_GREY, ORANGE, RED, WHITE, colour_array, frame_box, render_ascii,
                             render_ppm, state_colour)


class TestAscii(unittest.TestCase):
    """Text frames."""

    def test_obstacle_frame(self):
        """A 1x1 obstacle framed with one cell of margin."""
        text = render_ascii(obstacle_configuration([((0, 0), 1, 1)]))
        self.assertEqual(text, ".....\n.↘↓↙.\n.→1←.\n.↗↑↖.\n.....\n")

    def test_overlay(self):
        """Overlay marks background cells only."""
        x = Configuration(F_ALPHABET, {(0, 0): "1"})
        text = render_ascii(x, box=(0, 0, 2, 0), overlay=[(0, 0), (1, 0)])
        self.assertEqual(text, "1+.\n")

    def test_empty(self):
        """An empty configuration renders one background cell."""
        self.assertEqual(frame_box(Configuration(F_ALPHABET)), (0, 0, 0, 0))
        self.assertEqual(render_ascii(Configuration(F_ALPHABET)), ".\n")


class TestPpm(unittest.TestCase):
    """Binary images."""

    def test_header_and_size(self):
        """Scale multiplies both dimensions."""
        x = Configuration(F_ALPHABET, {(0, 1): "U", (0, 0): "D"})
        data = render_ppm(x, scale=3)
        header = b"P6\n9 12\n255\n"
        self.assertTrue(data.startswith(header))
        self.assertEqual(len(data), len(header) + 9 * 12 * 3)

    def test_colours(self):
        """Particles are blue over red; the margin is white."""
        x = Configuration(F_ALPHABET, {(0, 1): "U", (0, 0): "D"})
        image = colour_array(x)
        self.assertEqual(tuple(image[1, 1]), BLUE)
        self.assertEqual(tuple(image[2, 1]), RED)
        self.assertEqual(tuple(image[0, 0]), WHITE)

    def test_overlay_colour(self):
        """Overlaid background is light grey."""
        image = colour_array(Configuration(F_ALPHABET), box=(0, 0, 1, 0), overlay=[(1, 0)])
        self.assertEqual(tuple(image[0, 1]), LIGHT_GREY)
        self.assertEqual(tuple(image[0, 0]), WHITE)

    def test_palette(self):
        """Arrows share one colour; T-obstacle states differ from plain interiors."""
        self.assertEqual(state_colour("↗"), ORANGE)
        self.assertEqual(state_colour("0"), WHITE)
        self.assertNotEqual(state_colour("t/↗"), state_colour("0._.-.-"))

    def test_bad_scale(self):
        """Scale starts at 1."""
        with self.assertRaises(ValueError):
            render_ppm(Configuration(F_ALPHABET), scale=0)


if __name__ == '__main__':
    unittest.main()
