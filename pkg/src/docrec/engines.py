"""Seeded record generators for the three document domains.

Each generator is a pure function of (config, seed): records come out
bit-identical across runs and platforms.  Continuous coordinates are
normalized to [0, 1] relative to the rendered canvas and quantized to pixel
centers before storage, so the ground truth is exactly representable by the
pixel-level coordinate head.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .records import (
    GRAPH,
    SEQUENCE,
    SET,
    DiscreteProp,
    Node,
    NodeType,
    PointProp,
    Record,
    RecordSchema,
    RelationshipNode,
    RelationType,
    canonical_record,
)
from .rng import make_rng

# ---------------------------------------------------------------------------
# Coordinate grid helpers.  Pixel i covers normalized [i/side, (i+1)/side);
# its center is (i + 0.5) / side.


def pixel_index(v: float, side: int) -> int:
    return min(max(int(np.floor(v * side)), 0), side - 1)


def pixel_center(i: int, side: int) -> float:
    return (i + 0.5) / side


def quantize(v: float, side: int) -> float:
    return pixel_center(pixel_index(v, side), side)


# ---------------------------------------------------------------------------
# Monophonic staff music: a sequence of clef, time signature, and notes.

CLEF_VALUES = ("treble", "bass")
TIMESIG_VALUES = ("1/4", "2/4", "3/4", "4/4")
DURATION_VALUES = ("whole", "half", "quarter", "eighth", "sixteenth")
DURATION_UNITS = (16, 8, 4, 2, 1)  # in sixteenths
PITCH_VALUES = tuple(f"pos{i}" for i in range(9))  # staff lines and spaces, bottom up

MUSIC_HEIGHT = 100


@dataclass(frozen=True)
class MusicConfig:
    """``timesig_choices`` narrows which signatures the sampler draws
    (uniformly); the schema vocabularies themselves stay fixed."""

    bars: int = 4
    timesig_choices: tuple[int, ...] = (0, 1, 2, 3)

    def __post_init__(self):
        if self.bars < 1:
            raise ValueError("bars must be positive")
        if not self.timesig_choices or any(not 0 <= t < 4 for t in self.timesig_choices):
            raise ValueError("timesig_choices must index the four signatures")

    @property
    def max_notes(self) -> int:
        return self.bars * 16


def music_schema(cfg: MusicConfig = MusicConfig()) -> RecordSchema:
    return RecordSchema(
        name="music",
        structure=SEQUENCE,
        node_types=(
            NodeType("clef", discrete=(DiscreteProp("clef_type", CLEF_VALUES),)),
            NodeType("time_signature", discrete=(DiscreteProp("signature", TIMESIG_VALUES),)),
            NodeType("note", discrete=(
                DiscreteProp("duration", DURATION_VALUES),
                DiscreteProp("pitch", PITCH_VALUES),
            )),
        ),
        max_nodes=2 + cfg.max_notes,
        canvas=(MUSIC_HEIGHT, None),
    )


def gen_music(cfg: MusicConfig, seed: int) -> Record:
    """One clef, one time signature, then notes; per bar the durations (in
    sixteenth units) sum exactly to numerator x 4, each duration drawn
    uniformly among those that still fit the bar."""
    rng = make_rng(seed)
    clef = int(rng.integers(len(CLEF_VALUES)))
    ts = int(cfg.timesig_choices[rng.integers(len(cfg.timesig_choices))])
    nodes = [Node(0, (clef,)), Node(1, (ts,))]
    bar_units = (ts + 1) * 4
    for _ in range(cfg.bars):
        remaining = bar_units
        while remaining > 0:
            fits = [d for d, units in enumerate(DURATION_UNITS) if units <= remaining]
            d = fits[rng.integers(len(fits))]
            pitch = int(rng.integers(len(PITCH_VALUES)))
            nodes.append(Node(2, (d, pitch)))
            remaining -= DURATION_UNITS[d]
    return Record(tuple(nodes))


def music_bar_lengths(record: Record) -> list[int]:
    """Note counts per bar, recovered from the time signature and durations."""
    ts = record.nodes[1].dprops[0]
    bar_units = (ts + 1) * 4
    counts, used, n = [], 0, 0
    for node in record.nodes[2:]:
        used += DURATION_UNITS[node.dprops[0]]
        n += 1
        if used == bar_units:
            counts.append(n)
            used, n = 0, 0
        elif used > bar_units:
            raise ValueError("durations do not align to bars")
    if n:
        raise ValueError("trailing notes do not fill a bar")
    return counts


# ---------------------------------------------------------------------------
# Shape drawings: an unordered set of lines and circles on a 280x280 canvas.

SHAPES_SIDE = 280


@dataclass(frozen=True)
class ShapesConfig:
    max_primitives: int = 10
    min_line_length: float = 0.08
    min_radius: float = 0.04
    margin_low: float = 0.05
    margin_high: float = 0.15

    def __post_init__(self):
        if not 1 <= self.max_primitives <= 10:
            raise ValueError("max_primitives must be in 1..10")
        if not 0.0 <= self.margin_low <= self.margin_high < 0.5:
            raise ValueError("margins must satisfy 0 <= low <= high < 0.5")


def shapes_schema(cfg: ShapesConfig = ShapesConfig()) -> RecordSchema:
    return RecordSchema(
        name="shapes",
        structure=SET,
        node_types=(
            NodeType("line", points=(PointProp("start"), PointProp("end"))),
            NodeType("circle", points=(PointProp("leftmost"), PointProp("rightmost"))),
        ),
        max_nodes=cfg.max_primitives,
        canvas=(SHAPES_SIDE, SHAPES_SIDE),
    )


def _sample_polyline(cfg: ShapesConfig, rng: np.random.Generator) -> list[tuple]:
    """Axis-aligned rectilinear path, the projection-like half of the mix."""
    n_seg = int(rng.integers(2, cfg.max_primitives + 1)) if cfg.max_primitives > 2 else cfg.max_primitives
    x, y = rng.uniform(0.2, 0.8, size=2)
    horizontal = bool(rng.integers(2))
    prims = []
    for _ in range(n_seg):
        step = float(rng.uniform(0.2, 0.7)) * (1 if rng.integers(2) else -1)
        if horizontal:
            nx = float(np.clip(x + step, 0.0, 1.0))
            if abs(nx - x) >= cfg.min_line_length:
                prims.append(("line", x, y, nx, y))
                x = nx
        else:
            ny = float(np.clip(y + step, 0.0, 1.0))
            if abs(ny - y) >= cfg.min_line_length:
                prims.append(("line", x, y, x, ny))
                y = ny
        horizontal = not horizontal
    return prims


def _sample_scatter(cfg: ShapesConfig, rng: np.random.Generator) -> list[tuple]:
    n = int(rng.integers(1, cfg.max_primitives + 1))
    prims = []
    for _ in range(n):
        if rng.integers(2):
            r = float(rng.uniform(cfg.min_radius, 0.22))
            cx = float(rng.uniform(r, 1 - r))
            cy = float(rng.uniform(r, 1 - r))
            prims.append(("circle", cx, cy, r))
        else:
            for _ in range(32):
                x0, y0, x1, y1 = rng.uniform(0.0, 1.0, size=4)
                if np.hypot(x1 - x0, y1 - y0) >= cfg.min_line_length:
                    break
            prims.append(("line", float(x0), float(y0), float(x1), float(y1)))
    return prims


def _shape_points(prim) -> list[tuple[float, float]]:
    if prim[0] == "line":
        return [(prim[1], prim[2]), (prim[3], prim[4])]
    _, cx, cy, r = prim
    return [(cx - r, cy - r), (cx + r, cy + r)]


def _transform_shapes(prims, cfg: ShapesConfig, rng: np.random.Generator) -> list[tuple]:
    """Random margins, mirroring, scaling, and translation; keeps every
    primitive fully inside the unit canvas."""
    mirror_x = bool(rng.integers(2))
    mirror_y = bool(rng.integers(2))
    ml, mr, mt, mb = rng.uniform(cfg.margin_low, cfg.margin_high, size=4)
    pts = np.array([p for prim in prims for p in _shape_points(prim)])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    avail = np.array([1.0 - ml - mr, 1.0 - mt - mb])
    fit = float(min(np.min(avail / span), 2.5))
    s = fit * float(rng.uniform(0.55, 1.0))
    slack = avail - span * s
    off = np.array([ml, mt]) + rng.uniform(0.0, 1.0, size=2) * np.maximum(slack, 0.0)

    def tx(x: float) -> float:
        if mirror_x:
            x = lo[0] + hi[0] - x
        return (x - lo[0]) * s + off[0]

    def ty(y: float) -> float:
        if mirror_y:
            y = lo[1] + hi[1] - y
        return (y - lo[1]) * s + off[1]

    out = []
    for prim in prims:
        if prim[0] == "line":
            out.append(("line", tx(prim[1]), ty(prim[2]), tx(prim[3]), ty(prim[4])))
        else:
            out.append(("circle", tx(prim[1]), ty(prim[2]), prim[3] * s))
    return out


def _emit_shapes(prims) -> list[Node] | None:
    nodes = []
    for prim in prims:
        if prim[0] == "line":
            x0, y0, x1, y1 = (quantize(v, SHAPES_SIDE) for v in prim[1:])
            if (x0, y0) == (x1, y1):
                return None
            nodes.append(Node(0, cprops=(x0, y0, x1, y1)))
        else:
            _, cx, cy, r = prim
            lx = quantize(cx - r, SHAPES_SIDE)
            rx = quantize(cx + r, SHAPES_SIDE)
            y = quantize(cy, SHAPES_SIDE)
            if pixel_index(rx, SHAPES_SIDE) - pixel_index(lx, SHAPES_SIDE) < 2:
                return None
            nodes.append(Node(1, cprops=(lx, y, rx, y)))
    if len(set(nodes)) != len(nodes):
        return None
    return nodes


def gen_shapes(cfg: ShapesConfig, seed: int) -> Record:
    """1..max_primitives lines/circles: half the time an axis-aligned
    rectilinear polyline, otherwise independent primitives; then mirrored,
    scaled, and translated into randomly sized margins."""
    rng = make_rng(seed)
    for _ in range(64):
        raw = _sample_polyline(cfg, rng) if rng.random() < 0.5 else _sample_scatter(cfg, rng)
        if not raw:
            continue
        nodes = _emit_shapes(_transform_shapes(raw, cfg, rng))
        if nodes:
            return Record(tuple(nodes))
    raise RuntimeError(f"shape sampling failed to converge for seed {seed}")


# ---------------------------------------------------------------------------
# Simplified engineering drawings: a closed L of six lines, connection
# relationships between adjacent lines, and optional dimension annotations
# linked to their line.

LSHAPE_SIDE = 140
_LSHAPE_MARGIN = 20
_ANNOTATION_OFFSET = 12


@dataclass(frozen=True)
class LShapeConfig:
    annotation_probability: float = 0.3
    value_range: tuple[int, int] = (0, 100)
    mirror: bool = True
    rotate: bool = True
    translate: bool = True

    def __post_init__(self):
        if not 0.0 <= self.annotation_probability <= 1.0:
            raise ValueError("annotation_probability must be in [0, 1]")
        lo, hi = self.value_range
        if lo > hi or lo < 0:
            raise ValueError("invalid value_range")


def lshape_schema(cfg: LShapeConfig = LShapeConfig()) -> RecordSchema:
    lo, hi = cfg.value_range
    return RecordSchema(
        name="lshape",
        structure=GRAPH,
        node_types=(
            NodeType("line", points=(PointProp("start"), PointProp("end"))),
            NodeType("dimension", discrete=(
                DiscreteProp("value", tuple(str(v) for v in range(lo, hi + 1))),
            ), points=(PointProp("center"),)),
        ),
        rel_types=(
            RelationType("connection", arity=2, symmetric=True),
            RelationType("dimension_link", arity=2, symmetric=False),
        ),
        max_nodes=12,
        canvas=(LSHAPE_SIDE, LSHAPE_SIDE),
    )


def _point_in_polygon(x: float, y: float, verts: list[tuple[float, float]]) -> bool:
    inside = False
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            t = (y - y0) / (y1 - y0)
            if x < x0 + t * (x1 - x0):
                inside = not inside
    return inside


def gen_lshape(cfg: LShapeConfig, seed: int) -> Record:
    """Six lines forming a closed axis-aligned L (then mirrored/rotated/
    translated), six connection relationships, and per line a 30% chance of
    a dimension annotation with its link relationship."""
    rng = make_rng(seed)
    w_outer = int(rng.integers(50, 101))
    h_outer = int(rng.integers(50, 101))
    w_notch = int(rng.integers(18, w_outer - 16))
    h_notch = int(rng.integers(18, h_outer - 16))
    verts = [
        (0, 0), (w_outer, 0), (w_outer, h_notch),
        (w_notch, h_notch), (w_notch, h_outer), (0, h_outer),
    ]

    if cfg.rotate:
        k = int(rng.integers(4))
        for _ in range(k):
            verts = [(-y, x) for x, y in verts]
    if cfg.mirror and rng.integers(2):
        verts = [(-x, y) for x, y in verts]

    xs = [x for x, _ in verts]
    ys = [y for _, y in verts]
    span_x, span_y = max(xs) - min(xs), max(ys) - min(ys)
    lo = _LSHAPE_MARGIN
    if cfg.translate:
        ox = int(rng.integers(lo, LSHAPE_SIDE - lo - span_x + 1))
        oy = int(rng.integers(lo, LSHAPE_SIDE - lo - span_y + 1))
    else:
        ox = (LSHAPE_SIDE - span_x) // 2
        oy = (LSHAPE_SIDE - span_y) // 2
    verts = [(x - min(xs) + ox, y - min(ys) + oy) for x, y in verts]

    nodes: list[Node] = []
    for i in range(6):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % 6]
        nodes.append(Node(0, cprops=(
            pixel_center(x0, LSHAPE_SIDE), pixel_center(y0, LSHAPE_SIDE),
            pixel_center(x1, LSHAPE_SIDE), pixel_center(y1, LSHAPE_SIDE),
        )))
    rels = [RelationshipNode(0, (i, (i + 1) % 6)) for i in range(6)]

    lo_v, hi_v = cfg.value_range
    fverts = [(float(x), float(y)) for x, y in verts]
    for i in range(6):
        if rng.random() >= cfg.annotation_probability:
            continue
        value = int(rng.integers(lo_v, hi_v + 1)) - lo_v
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % 6]
        mx, my = (x0 + x1) / 2.0, (y0 + y1) / 2.0
        # Unit normal of an axis-aligned edge; pick the side outside the polygon.
        nx, ny = (0.0, 1.0) if y0 == y1 else (1.0, 0.0)
        cx, cy = mx + nx * _ANNOTATION_OFFSET, my + ny * _ANNOTATION_OFFSET
        if _point_in_polygon(cx, cy, fverts):
            cx, cy = mx - nx * _ANNOTATION_OFFSET, my - ny * _ANNOTATION_OFFSET
        ann = len(nodes)
        nodes.append(Node(1, dprops=(value,), cprops=(
            quantize(cx / LSHAPE_SIDE, LSHAPE_SIDE),
            quantize(cy / LSHAPE_SIDE, LSHAPE_SIDE),
        )))
        rels.append(RelationshipNode(1, (ann, i)))

    record = Record(tuple(nodes), tuple(rels))
    return canonical_record(record, lshape_schema(cfg))


# ---------------------------------------------------------------------------
# Domain registry and dataset files.


@dataclass(frozen=True)
class Domain:
    name: str
    config_cls: type
    default_config: object
    schema_fn: object
    generate: object

    def schema(self, cfg=None) -> RecordSchema:
        return self.schema_fn(cfg if cfg is not None else self.default_config)

    def config_from_dict(self, d: dict):
        kwargs = {}
        for f in dataclasses.fields(self.config_cls):
            if f.name in d:
                v = d[f.name]
                kwargs[f.name] = tuple(v) if isinstance(v, list) else v
        return self.config_cls(**kwargs)


DOMAINS = {
    "music": Domain("music", MusicConfig, MusicConfig(), music_schema, gen_music),
    "shapes": Domain("shapes", ShapesConfig, ShapesConfig(), shapes_schema, gen_shapes),
    "lshape": Domain("lshape", LShapeConfig, LShapeConfig(), lshape_schema, gen_lshape),
}


def get_domain(name: str) -> Domain:
    try:
        return DOMAINS[name]
    except KeyError:
        raise ValueError(f"unknown domain {name!r}; expected one of {sorted(DOMAINS)}") from None
