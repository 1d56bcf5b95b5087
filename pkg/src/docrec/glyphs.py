"""Embedded monochrome bitmap glyphs.

All symbols are shipped as in-code bitmaps so renders are bit-identical on
every platform; no font engine is involved.  Bitmaps are uint8 arrays with
1 = ink.
"""

from __future__ import annotations

import numpy as np


def bitmap(rows: list[str]) -> np.ndarray:
    return np.array([[1 if ch == "#" else 0 for ch in row] for row in rows], dtype=np.uint8)


# ---------------------------------------------------------------------------
# Digit fonts: four variants used by the drawing renderer (and the music
# time signatures, which always use font 0).

_FONT_STANDARD = [
    bitmap(rows)
    for rows in [
        ["#####", "#...#", "#...#", "#...#", "#...#", "#...#", "#####"],  # 0
        ["..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."],  # 1
        ["#####", "....#", "....#", "#####", "#....", "#....", "#####"],  # 2
        ["#####", "....#", "....#", ".####", "....#", "....#", "#####"],  # 3
        ["#...#", "#...#", "#...#", "#####", "....#", "....#", "....#"],  # 4
        ["#####", "#....", "#....", "#####", "....#", "....#", "#####"],  # 5
        ["#####", "#....", "#....", "#####", "#...#", "#...#", "#####"],  # 6
        ["#####", "....#", "...#.", "..#..", "..#..", ".#...", ".#..."],  # 7
        ["#####", "#...#", "#...#", "#####", "#...#", "#...#", "#####"],  # 8
        ["#####", "#...#", "#...#", "#####", "....#", "....#", "#####"],  # 9
    ]
]

_FONT_MINI = [
    bitmap(rows)
    for rows in [
        ["###", "#.#", "#.#", "#.#", "###"],
        [".#.", "##.", ".#.", ".#.", "###"],
        ["###", "..#", "###", "#..", "###"],
        ["###", "..#", ".##", "..#", "###"],
        ["#.#", "#.#", "###", "..#", "..#"],
        ["###", "#..", "###", "..#", "###"],
        ["###", "#..", "###", "#.#", "###"],
        ["###", "..#", ".#.", ".#.", ".#."],
        ["###", "#.#", "###", "#.#", "###"],
        ["###", "#.#", "###", "..#", "###"],
    ]
]

_FONT_SLANT = [
    bitmap(rows)
    for rows in [
        [".####", "#...#", "#...#", "#...#", "#...#", "#...#", "####."],
        ["...#.", "..##.", "...#.", "..#..", "..#..", ".#...", ".###."],
        [".####", "....#", "...##", "..#..", ".#...", "#....", "#####"],
        [".####", "....#", "..###", "....#", "....#", "...##", "###.."],
        ["...##", "..#.#", ".#..#", "#####", "...#.", "...#.", "...#."],
        ["#####", "#....", "####.", "....#", "....#", "#...#", ".###."],
        ["..###", ".#...", "#....", "####.", "#...#", "#...#", ".###."],
        ["#####", "....#", "...#.", "..#..", ".#...", ".#...", "#...."],
        [".###.", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", ".###."],
        [".###.", "#...#", "#...#", ".####", "....#", "...#.", "###.."],
    ]
]


def _bold(glyph: np.ndarray) -> np.ndarray:
    out = glyph.copy()
    out[:, 1:] |= glyph[:, :-1]
    return out


_FONT_BOLD = [_bold(g) for g in _FONT_STANDARD]

DIGIT_FONTS: tuple[list[np.ndarray], ...] = (_FONT_STANDARD, _FONT_MINI, _FONT_SLANT, _FONT_BOLD)
N_FONTS = len(DIGIT_FONTS)
N_FONT_SIZES = 10


def scale_bitmap(glyph: np.ndarray, target_h: int) -> np.ndarray:
    """Nearest-neighbor scale to a target height, preserving aspect."""
    h, w = glyph.shape
    if target_h == h:
        return glyph
    target_w = max(1, round(w * target_h / h))
    ri = np.minimum((np.arange(target_h) * h) // target_h, h - 1)
    ci = np.minimum((np.arange(target_w) * w) // target_w, w - 1)
    return glyph[np.ix_(ri, ci)]


def font_height(size: int) -> int:
    return 6 + size


def render_number(value: int, font: int = 0, size: int = 3) -> np.ndarray:
    """Bitmap of a non-negative integer: digit glyphs with 1-px spacing."""
    glyphs = [scale_bitmap(DIGIT_FONTS[font][int(d)], font_height(size)) for d in str(value)]
    h = glyphs[0].shape[0]
    cols = sum(g.shape[1] for g in glyphs) + (len(glyphs) - 1)
    out = np.zeros((h, cols), dtype=np.uint8)
    x = 0
    for g in glyphs:
        out[:, x : x + g.shape[1]] = g
        x += g.shape[1] + 1
    return out


# ---------------------------------------------------------------------------
# Music symbols.

CLEF_TREBLE = bitmap([
    ".....#....",
    "....##....",
    "....#.#...",
    "....#.#...",
    "....#.#...",
    "....#.#...",
    "....##....",
    "...##.....",
    "..##......",
    ".##.......",
    "##........",
    "#...##....",
    "#..#..#...",
    "#..#..##..",
    "#.#....#..",
    "##.#...#..",
    ".#..#..#..",
    ".#...#.#..",
    "..#...##..",
    "...#...#..",
    "....#.#...",
    ".....#....",
    ".....#....",
    ".....#....",
    "....##....",
    "...#.#....",
    "...#.#....",
    "....#.....",
])

CLEF_BASS = bitmap([
    "..###....",
    ".#...#...",
    "#.....#..",
    "#.....#.#",
    "......#..",
    "......#..",
    ".....#..#",
    "....#....",
    "...#.....",
    "..#......",
    ".#.......",
    "#........",
])

NOTE_HEAD_FILLED = bitmap([
    ".#####.",
    "#######",
    "#######",
    "#######",
    ".#####.",
])

NOTE_HEAD_HOLLOW = bitmap([
    ".#####.",
    "##...##",
    "#.....#",
    "##...##",
    ".#####.",
])

FLAG = bitmap([
    "#...",
    "##..",
    ".##.",
    "..##",
    "...#",
])
