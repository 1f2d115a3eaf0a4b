#!/usr/bin/env python3
"""
ASCII frames and PPM (P6) images of configurations.

Colours are fixed per state kind: background white, `1` brown, arrows
orange, other obstacle interiors amber, T-obstacle states gold, U blue and
D red. A path overlay is drawn light grey on background cells only.
"""

import logging
from typing import Iterable, Optional, Tuple

import numpy as np

from .grid import BACKGROUND_CHAR, Configuration, Position
from .sft import ARROWS

logger = logging.getLogger(__name__)

Colour = Tuple[int, int, int]
Box = Tuple[int, int, int, int]

WHITE: Colour = (255, 255, 255)
BROWN: Colour = (122, 74, 38)
ORANGE: Colour = (245, 130, 32)
AMBER: Colour = (255, 191, 0)
GOLD: Colour = (212, 175, 55)
BLUE: Colour = (35, 85, 220)
RED: Colour = (215, 40, 40)
LIGHT_GREY: Colour = (200, 200, 200)
OVERLAY_CHAR = "+"


def state_colour(state: str, quiescent: str = "0") -> Colour:
    if state == quiescent:
        return WHITE
    if state == "U":
        return BLUE
    if state == "D":
        return RED
    if state == "1":
        return BROWN
    if state in ARROWS:
        return ORANGE
    if "/" in state:
        return GOLD
    return AMBER


def frame_box(x: Configuration, overlay: Iterable[Position] = (), margin: int = 1) -> Box:
    """Bounding box of support and overlay, widened by margin; (0, 0, 0, 0) when both are empty."""
    points = list(x.support()) + list(overlay)
    if not points:
        return (0, 0, 0, 0)
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return (min(xs) - margin, min(ys) - margin, max(xs) + margin, max(ys) + margin)


def render_ascii(x: Configuration, box: Optional[Box] = None, overlay: Iterable[Position] = ()) -> str:
    """Rows top first; background cells print `.`, overlaid background cells `+`."""
    marked = set(overlay)
    left, bottom, right, top = box or frame_box(x, marked)
    q = x.alphabet.quiescent
    lines = []
    for y in range(top, bottom - 1, -1):
        row = []
        for cx in range(left, right + 1):
            state = x[(cx, y)]
            if state == q:
                row.append(OVERLAY_CHAR if (cx, y) in marked else BACKGROUND_CHAR)
            else:
                row.append(x.alphabet.char_of(state))
        lines.append("".join(row))
    return "\n".join(lines) + "\n"


def colour_array(x: Configuration, box: Optional[Box] = None, overlay: Iterable[Position] = ()) -> np.ndarray:
    """(rows, cols, 3) uint8 array, top row first."""
    marked = set(overlay)
    left, bottom, right, top = box or frame_box(x, marked)
    q = x.alphabet.quiescent
    image = np.empty((top - bottom + 1, right - left + 1, 3), dtype=np.uint8)
    image[:, :] = WHITE
    for (px, py) in marked:
        if left <= px <= right and bottom <= py <= top and x[(px, py)] == q:
            image[top - py, px - left] = LIGHT_GREY
    for (px, py), state in x.items():
        if left <= px <= right and bottom <= py <= top:
            image[top - py, px - left] = state_colour(state, q)
    return image


def render_ppm(x: Configuration, scale: int = 1, box: Optional[Box] = None,
               overlay: Iterable[Position] = ()) -> bytes:
    """Binary PPM, `scale` pixels per cell."""
    if scale < 1:
        raise ValueError("scale must be at least 1")
    image = colour_array(x, box, overlay)
    if scale > 1:
        image = np.repeat(np.repeat(image, scale, axis=0), scale, axis=1)
    height, width = image.shape[:2]
    logger.debug("ppm %dx%d at scale %d", width, height, scale)
    return f"P6\n{width} {height}\n255\n".encode("ascii") + image.tobytes()
