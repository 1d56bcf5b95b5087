"""Record-to-image synthesis: deterministic grayscale rasterizers.

All drawing is integer supercover rasterization in pixel-center
coordinates (pixel i has center i; a normalized coordinate v maps to
v * side - 0.5).  Every pixel the ideal path passes through receives ink,
renders are bit-identical for a given (record, style), and no anti-aliasing
is applied anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import glyphs
from .records import Record, RecordSchema, SchemaError, validate_record
from .engines import (
    DURATION_UNITS,
    LSHAPE_SIDE,
    MUSIC_HEIGHT,
    SHAPES_SIDE,
    lshape_schema,
    music_bar_lengths,
    music_schema,
    shapes_schema,
)
from .rng import derive_seed, make_rng

BACKGROUND = 255

GRAY_LEVELS = (0, 32, 64, 96)
N_ARROW_STYLES = 3


@dataclass
class DocumentImage:
    """Single-channel page: uint8, row-major, 0 = black ink, 255 = white."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be a 2-D uint8 array")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class RenderStyle:
    thickness: int = 1
    gray: int = 0
    arrow_style: int = 0
    font: int = 0
    font_size: int = 3
    blur: bool = False

    def __post_init__(self):
        if self.thickness < 1:
            raise ValueError("thickness must be >= 1")
        if self.gray not in GRAY_LEVELS:
            raise ValueError(f"gray must be one of {GRAY_LEVELS}")
        if not 0 <= self.arrow_style < N_ARROW_STYLES:
            raise ValueError("arrow_style out of range")
        if not 0 <= self.font < glyphs.N_FONTS:
            raise ValueError("font out of range")
        if not 0 <= self.font_size < glyphs.N_FONT_SIZES:
            raise ValueError("font_size out of range")


def style_for_seed(seed: int) -> RenderStyle:
    """The per-sample synthesis variation for drawing domains."""
    rng = make_rng(derive_seed(seed, "style"))
    return RenderStyle(
        thickness=1 + int(rng.random() < 0.35),
        gray=GRAY_LEVELS[rng.integers(len(GRAY_LEVELS))],
        arrow_style=int(rng.integers(N_ARROW_STYLES)),
        font=int(rng.integers(glyphs.N_FONTS)),
        font_size=int(rng.integers(glyphs.N_FONT_SIZES)),
        blur=bool(rng.random() < 0.3),
    )


# ---------------------------------------------------------------------------
# Primitive plotting


def _run_concat(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Expand per-column row ranges [lo, hi] into flat (row, col-index) pairs."""
    counts = hi - lo + 1
    total = int(counts.sum())
    idx = np.arange(total)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    rows = np.repeat(lo, counts) + (idx - starts)
    cols = np.repeat(np.arange(lo.shape[0]), counts)
    return rows, cols


def line_cells(x0: float, y0: float, x1: float, y1: float) -> tuple[np.ndarray, np.ndarray]:
    """All (row, col) cells a segment touches, in pixel-center coordinates."""
    steep = abs(y1 - y0) > abs(x1 - x0)
    if steep:
        x0, y0, x1, y1 = y0, x0, y1, x1
    if x0 > x1:
        x0, y0, x1, y1 = x1, y1, x0, y0
    c0 = int(np.floor(x0 + 0.5))
    c1 = int(np.floor(x1 + 0.5))
    cols = np.arange(c0, c1 + 1)
    if x1 == x0:
        ya, yb = np.array([min(y0, y1)]), np.array([max(y0, y1)])
    else:
        slope = (y1 - y0) / (x1 - x0)
        xa = np.clip(cols - 0.5, x0, x1)
        xb = np.clip(cols + 0.5, x0, x1)
        ya = y0 + (xa - x0) * slope
        yb = y0 + (xb - x0) * slope
    rlo = np.floor(np.minimum(ya, yb) + 0.5).astype(np.int64)
    rhi = np.floor(np.maximum(ya, yb) + 0.5).astype(np.int64)
    rows, col_idx = _run_concat(rlo, rhi)
    cols = cols[col_idx]
    if steep:
        rows, cols = cols, rows
    return rows, cols


def circle_cells(cx: float, cy: float, r: float) -> tuple[np.ndarray, np.ndarray]:
    """All (row, col) cells a circle outline touches, via the four arc bands
    where the curve is at most 45 degrees steep along the scanned axis."""
    xe = r / np.sqrt(2.0)
    all_rows, all_cols = [], []

    def band(center_major, center_minor, sign):
        # Scan major-axis cells c; minor(x) = center_minor + sign*sqrt(r^2-(x-c)^2).
        c0 = int(np.floor(center_major - xe + 0.5))
        c1 = int(np.floor(center_major + xe + 0.5))
        cells = np.arange(c0, c1 + 1)
        xa = np.clip(cells - 0.5, center_major - xe, center_major + xe)
        xb = np.clip(cells + 0.5, center_major - xe, center_major + xe)
        ma = center_minor + sign * np.sqrt(np.maximum(r * r - (xa - center_major) ** 2, 0.0))
        mb = center_minor + sign * np.sqrt(np.maximum(r * r - (xb - center_major) ** 2, 0.0))
        lo = np.minimum(ma, mb)
        hi = np.maximum(ma, mb)
        # The extremum center_minor + sign*r sits inside the cell containing
        # the center; include it there.
        contains = (xa <= center_major) & (center_major <= xb)
        lo = np.where(contains & (sign < 0), center_minor - r, lo)
        hi = np.where(contains & (sign > 0), center_minor + r, hi)
        mlo = np.floor(lo + 0.5).astype(np.int64)
        mhi = np.floor(hi + 0.5).astype(np.int64)
        minor, idx = _run_concat(mlo, mhi)
        return minor, cells[idx]

    for sign in (-1, 1):
        rows, cols = band(cx, cy, sign)   # scan columns, minor = row
        all_rows.append(rows)
        all_cols.append(cols)
        cols2, rows2 = band(cy, cx, sign)  # scan rows, minor = col
        all_rows.append(rows2)
        all_cols.append(cols2)
    return np.concatenate(all_rows), np.concatenate(all_cols)


def _plot(pixels: np.ndarray, rows: np.ndarray, cols: np.ndarray, gray: int, thickness: int = 1) -> None:
    h, w = pixels.shape
    offs = range(-(thickness - 1) // 2, thickness // 2 + 1)
    for dr in offs:
        for dc in offs:
            r = rows + dr
            c = cols + dc
            keep = (r >= 0) & (r < h) & (c >= 0) & (c < w)
            np.minimum.at(pixels, (r[keep], c[keep]), np.uint8(gray))


def _blit(pixels: np.ndarray, glyph: np.ndarray, top: int, left: int, gray: int) -> None:
    h, w = pixels.shape
    gh, gw = glyph.shape
    r0, c0 = max(top, 0), max(left, 0)
    r1, c1 = min(top + gh, h), min(left + gw, w)
    if r0 >= r1 or c0 >= c1:
        return
    window = pixels[r0:r1, c0:c1]
    mask = glyph[r0 - top : r1 - top, c0 - left : c1 - left] > 0
    window[mask] = np.minimum(window[mask], np.uint8(gray))


def _clear(pixels: np.ndarray, top: int, left: int, h: int, w: int) -> None:
    r0, c0 = max(top, 0), max(left, 0)
    r1, c1 = min(top + h, pixels.shape[0]), min(left + w, pixels.shape[1])
    if r0 < r1 and c0 < c1:
        pixels[r0:r1, c0:c1] = BACKGROUND


def box_blur(pixels: np.ndarray) -> np.ndarray:
    """3x3 integer box blur with replicated edges; exact and deterministic."""
    padded = np.pad(pixels.astype(np.int32), 1, mode="edge")
    acc = np.zeros_like(pixels, dtype=np.int32)
    for dr in range(3):
        for dc in range(3):
            acc += padded[dr : dr + pixels.shape[0], dc : dc + pixels.shape[1]]
    return (acc // 9).astype(np.uint8)


def _px(v: float, side: int) -> float:
    return v * side - 0.5


# ---------------------------------------------------------------------------
# Music


STAFF_TOP = 34
STAFF_GAP = 8
STAFF_BOTTOM = STAFF_TOP + 4 * STAFF_GAP  # 66
CLEF_X = 6
TS_X = 20
NOTES_X = 32
NOTE_ADVANCE = 14
BAR_ADVANCE = 6
RIGHT_MARGIN = 6
STEM_LEN = 14


def pitch_to_y(pitch: int) -> int:
    return STAFF_BOTTOM - 4 * pitch


def music_width(record: Record) -> int:
    n_notes = len(record.nodes) - 2
    n_bars = len(music_bar_lengths(record))
    return NOTES_X + n_notes * NOTE_ADVANCE + n_bars * BAR_ADVANCE + RIGHT_MARGIN


def render_music(record: Record) -> DocumentImage:
    """100-px-high staff: clef, time signature, then notes left to right with
    a fixed advance; bar lines close each bar.  Width follows note count."""
    validate_record(record, music_schema())
    if len(record.nodes) < 2 or record.nodes[0].node_type != 0 or record.nodes[1].node_type != 1:
        raise SchemaError("music record must start with clef and time signature")
    if any(n.node_type != 2 for n in record.nodes[2:]):
        raise SchemaError("music record may only contain notes after the header")
    bars = music_bar_lengths(record)

    width = music_width(record)
    img = np.full((MUSIC_HEIGHT, width), BACKGROUND, dtype=np.uint8)
    for line in range(5):
        img[STAFF_TOP + line * STAFF_GAP, :] = 0

    clef = glyphs.CLEF_TREBLE if record.nodes[0].dprops[0] == 0 else glyphs.CLEF_BASS
    _blit(img, clef, STAFF_TOP + 2, CLEF_X, 0)

    numerator = glyphs.scale_bitmap(glyphs.DIGIT_FONTS[0][record.nodes[1].dprops[0] + 1], 13)
    denominator = glyphs.scale_bitmap(glyphs.DIGIT_FONTS[0][4], 13)
    _blit(img, numerator, STAFF_TOP + 1, TS_X, 0)
    _blit(img, denominator, STAFF_TOP + 18, TS_X, 0)

    x = NOTES_X
    note_i = 0
    bar_end = np.cumsum(bars) if bars else np.array([], dtype=int)
    for node in record.nodes[2:]:
        duration, pitch = node.dprops
        y = pitch_to_y(pitch)
        head = glyphs.NOTE_HEAD_FILLED if duration >= 2 else glyphs.NOTE_HEAD_HOLLOW
        _blit(img, head, y - 2, x + 3, 0)
        if duration >= 1:  # everything but a whole note carries a stem
            if pitch <= 4:
                stem_col, y0, y1 = x + 9, y - STEM_LEN, y - 1
            else:
                stem_col, y0, y1 = x + 3, y + 1, y + STEM_LEN
            img[y0 : y1 + 1, stem_col] = 0
            n_flags = max(0, duration - 2)
            for f in range(n_flags):
                if pitch <= 4:
                    _blit(img, glyphs.FLAG, y - STEM_LEN + 4 * f, stem_col + 1, 0)
                else:
                    _blit(img, glyphs.FLAG[::-1], y + STEM_LEN - 5 - 4 * f, stem_col + 1, 0)
        note_i += 1
        x += NOTE_ADVANCE
        if note_i in bar_end:
            img[STAFF_TOP : STAFF_BOTTOM + 1, x + 2] = 0
            x += BAR_ADVANCE
    return DocumentImage(img)


# ---------------------------------------------------------------------------
# Shape drawings


def render_shapes(record: Record, style: RenderStyle = RenderStyle()) -> DocumentImage:
    """280x280 canvas; integer supercover lines and circles, no AA."""
    validate_record(record, shapes_schema())
    img = np.full((SHAPES_SIDE, SHAPES_SIDE), BACKGROUND, dtype=np.uint8)
    for node in record.nodes:
        c = [_px(v, SHAPES_SIDE) for v in node.cprops]
        if node.node_type == 0:
            rows, cols = line_cells(c[0], c[1], c[2], c[3])
        else:
            cx = (c[0] + c[2]) / 2.0
            radius = (c[2] - c[0]) / 2.0
            rows, cols = circle_cells(cx, c[1], radius)
        _plot(img, rows, cols, style.gray, style.thickness)
    out = box_blur(img) if style.blur else img
    return DocumentImage(out)


# ---------------------------------------------------------------------------
# Simplified engineering drawings


_HELPLINE_GAP = 2
_HELPLINE_OVERRUN = 3
_ARROW_LEN = 4


def _draw_arrow(img, tip: np.ndarray, direction: np.ndarray, style: RenderStyle) -> None:
    u = direction / max(np.hypot(*direction), 1e-9)
    p = np.array([-u[1], u[0]])
    if style.arrow_style == 0:  # open V
        for sgn in (-1, 1):
            tail = tip - u * _ARROW_LEN + p * sgn * 3
            rows, cols = line_cells(tip[0], tip[1], tail[0], tail[1])
            _plot(img, rows, cols, style.gray, 1)
    elif style.arrow_style == 1:  # filled triangle
        for k in range(_ARROW_LEN):
            a = tip - u * k + p * (k * 0.75)
            b = tip - u * k - p * (k * 0.75)
            rows, cols = line_cells(a[0], a[1], b[0], b[1])
            _plot(img, rows, cols, style.gray, 1)
    else:  # architectural tick
        d = (u + p) * 2.5
        rows, cols = line_cells(*(tip - d), *(tip + d))
        _plot(img, rows, cols, style.gray, 1)


def render_lshape(record: Record, style: RenderStyle = RenderStyle()) -> DocumentImage:
    """140x140 canvas: the six polygon lines plus, per dimension annotation,
    two helplines, an arrowed dimension line, and the number in embedded
    digit glyphs centered on the annotation coordinate."""
    schema = lshape_schema()
    validate_record(record, schema)
    img = np.full((LSHAPE_SIDE, LSHAPE_SIDE), BACKGROUND, dtype=np.uint8)
    coords = [np.array([_px(v, LSHAPE_SIDE) for v in node.cprops]) for node in record.nodes]

    # Numbers go down first: their cleared text box must never erase line
    # ink, so every stroke is drawn on top of it.
    for node, c in zip(record.nodes, coords):
        if node.node_type != 1:
            continue
        number = int(schema.node_types[1].discrete[0].values[node.dprops[0]])
        glyph = glyphs.render_number(number, style.font, style.font_size)
        gh, gw = glyph.shape
        top = int(np.floor(c[1] + 0.5)) - gh // 2
        left = int(np.floor(c[0] + 0.5)) - gw // 2
        _clear(img, top - 1, left - 1, gh + 2, gw + 2)
        _blit(img, glyph, top, left, style.gray)

    for rel in record.relationships:
        if rel.rel_type != 1:
            continue
        ann_i, line_i = rel.endpoints
        center = coords[ann_i]
        a = coords[line_i][:2]
        b = coords[line_i][2:]
        mid = (a + b) / 2.0
        d = center - mid
        dist = max(np.hypot(*d), 1e-9)
        u = d / dist
        for end in (a, b):
            h0 = end + u * _HELPLINE_GAP
            h1 = end + u * (dist + _HELPLINE_OVERRUN)
            rows, cols = line_cells(h0[0], h0[1], h1[0], h1[1])
            _plot(img, rows, cols, style.gray, 1)
        pa, pb = a + d, b + d
        rows, cols = line_cells(pa[0], pa[1], pb[0], pb[1])
        _plot(img, rows, cols, style.gray, 1)
        along = (pb - pa) / max(np.hypot(*(pb - pa)), 1e-9)
        _draw_arrow(img, pa, -along, style)
        _draw_arrow(img, pb, along, style)

    for node, c in zip(record.nodes, coords):
        if node.node_type == 0:
            rows, cols = line_cells(c[0], c[1], c[2], c[3])
            _plot(img, rows, cols, style.gray, style.thickness)

    out = box_blur(img) if style.blur else img
    return DocumentImage(out)


# ---------------------------------------------------------------------------
# Dispatch and PNG I/O


def render_record(domain: str, record: Record, style_seed: int | None = None) -> DocumentImage:
    if domain == "music":
        return render_music(record)
    if domain == "shapes":
        return render_shapes(record)
    if domain == "lshape":
        style = style_for_seed(style_seed) if style_seed is not None else RenderStyle()
        return render_lshape(record, style)
    raise ValueError(f"unknown domain {domain!r}")


def save_png(image: DocumentImage, path) -> None:
    from PIL import Image

    Image.fromarray(image.pixels, mode="L").save(path, format="PNG")


def load_png(path) -> DocumentImage:
    from PIL import Image

    with Image.open(path) as im:
        return DocumentImage(np.asarray(im.convert("L"), dtype=np.uint8).copy())
