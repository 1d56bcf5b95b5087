"""Images and node sequences to padded, masked numeric batches.

Patches are 10x10 grayscale tiles scaled to [0, 1]; tiles that contain only
near-background pixels are dropped before encoding.  Node sequences use a
structure-of-arrays layout: one array per field, padded to the longest
element, with validity masks that keep padded slots out of attention and
loss computations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .records import Node, RecordSchema
from .raster import DocumentImage

BACKGROUND_THRESHOLD = 250


@dataclass
class PatchSet:
    """Informative patches of one image with their grid positions."""

    vectors: np.ndarray    # [n, patch*patch] float32 in [0, 1]
    positions: np.ndarray  # [n, 2] int64 (grid row, grid col)
    grid: tuple[int, int]
    image_size: tuple[int, int]
    patch_size: int

    def __len__(self) -> int:
        return self.vectors.shape[0]


def patchify(
    image: DocumentImage,
    patch_size: int = 10,
    background_threshold: int = BACKGROUND_THRESHOLD,
) -> PatchSet:
    """Split into patch_size tiles (padding right/bottom with background)
    and keep only tiles whose minimum pixel value is below the threshold."""
    px = image.pixels
    h, w = px.shape
    gh = -(-h // patch_size)
    gw = -(-w // patch_size)
    if (gh * patch_size, gw * patch_size) != (h, w):
        padded = np.full((gh * patch_size, gw * patch_size), 255, dtype=np.uint8)
        padded[:h, :w] = px
        px = padded
    tiles = px.reshape(gh, patch_size, gw, patch_size).transpose(0, 2, 1, 3)
    tiles = tiles.reshape(gh * gw, patch_size * patch_size)
    keep = tiles.min(axis=1) < background_threshold
    idx = np.nonzero(keep)[0]
    positions = np.stack([idx // gw, idx % gw], axis=1).astype(np.int64)
    vectors = tiles[idx].astype(np.float32) / 255.0
    return PatchSet(vectors, positions, (gh, gw), (h, w), patch_size)


def patch_pixel_target(pset: PatchSet, x: float, y: float) -> tuple[int, int]:
    """Training target for a coordinate point: the index of the informative
    patch containing (x, y) and the in-patch pixel index.

    If the containing tile carries no ink (possible only for degenerate
    inputs), the nearest informative tile is used and the pixel is clamped
    into it; ties break toward the lowest patch index.
    """
    if len(pset) == 0:
        raise ValueError("image has no informative patches")
    h, w = pset.image_size
    p = pset.patch_size
    pr = min(max(int(np.floor(y * h)), 0), h - 1)
    pc = min(max(int(np.floor(x * w)), 0), w - 1)
    grid = np.array([pr // p, pc // p])
    d2 = ((pset.positions - grid) ** 2).sum(axis=1)
    patch = int(np.argmin(d2))
    gr, gc = pset.positions[patch]
    rr = min(max(pr - gr * p, 0), p - 1)
    cc = min(max(pc - gc * p, 0), p - 1)
    return patch, int(rr * p + cc)


def point_from_patch_pixel(
    grid_pos: tuple[int, int], pixel: int, image_size: tuple[int, int], patch_size: int = 10
) -> tuple[float, float]:
    """Normalized (x, y) at the center of the selected pixel."""
    h, w = image_size
    rr, cc = divmod(int(pixel), patch_size)
    row = grid_pos[0] * patch_size + rr
    col = grid_pos[1] * patch_size + cc
    return (col + 0.5) / w, (row + 0.5) / h


@dataclass
class PatchBatch:
    vectors: np.ndarray      # [B, N, patch*patch]
    positions: np.ndarray    # [B, N, 2]
    mask: np.ndarray         # [B, N] bool, True = real patch
    image_sizes: np.ndarray  # [B, 2] (h, w)
    patch_size: int

    @property
    def max_patches(self) -> int:
        return self.vectors.shape[1]


def batch_patches(sets: list[PatchSet]) -> PatchBatch:
    b = len(sets)
    n = max((len(s) for s in sets), default=0)
    pp = sets[0].patch_size ** 2 if sets else 100
    vectors = np.zeros((b, n, pp), dtype=np.float32)
    positions = np.zeros((b, n, 2), dtype=np.int64)
    mask = np.zeros((b, n), dtype=bool)
    sizes = np.zeros((b, 2), dtype=np.int64)
    for i, s in enumerate(sets):
        k = len(s)
        vectors[i, :k] = s.vectors
        positions[i, :k] = s.positions
        mask[i, :k] = True
        sizes[i] = s.image_size
    return PatchBatch(vectors, positions, mask, sizes, sets[0].patch_size if sets else 10)


# ---------------------------------------------------------------------------
# Structure-of-arrays node batches


@dataclass
class NodeBatch:
    """SoA layout over node sequences, padded to the batch maximum."""

    types: np.ndarray    # [B, L] int64
    dvals: np.ndarray    # [B, L, Dmax] int64
    cvals: np.ndarray    # [B, L, Cmax] float64 (flat scalars, x then y)
    valid: np.ndarray    # [B, L] bool
    dmask: np.ndarray    # [B, L, Dmax] bool
    cmask: np.ndarray    # [B, L, Cmax] bool
    lengths: np.ndarray  # [B] int64


def schema_arities(schema: RecordSchema) -> tuple[int, int]:
    dmax = max((len(t.discrete) for t in schema.node_types), default=0)
    cmax = max((2 * len(t.points) for t in schema.node_types), default=0)
    return dmax, cmax


def encode_node_batch(node_lists: list[list[Node]], schema: RecordSchema) -> NodeBatch:
    """Pad per-field arrays to the longest sequence; masks mark real slots."""
    dmax, cmax = schema_arities(schema)
    b = len(node_lists)
    length = max((len(ns) for ns in node_lists), default=0)
    types = np.zeros((b, length), dtype=np.int64)
    dvals = np.zeros((b, length, dmax), dtype=np.int64)
    cvals = np.zeros((b, length, cmax), dtype=np.float64)
    valid = np.zeros((b, length), dtype=bool)
    dmask = np.zeros((b, length, dmax), dtype=bool)
    cmask = np.zeros((b, length, cmax), dtype=bool)
    lengths = np.zeros(b, dtype=np.int64)
    for i, nodes in enumerate(node_lists):
        lengths[i] = len(nodes)
        for j, node in enumerate(nodes):
            types[i, j] = node.node_type
            valid[i, j] = True
            nd, nc = len(node.dprops), len(node.cprops)
            if nd:
                dvals[i, j, :nd] = node.dprops
                dmask[i, j, :nd] = True
            if nc:
                cvals[i, j, :nc] = node.cprops
                cmask[i, j, :nc] = True
    return NodeBatch(types, dvals, cvals, valid, dmask, cmask, lengths)


def node_batch_to_lists(batch: NodeBatch, schema: RecordSchema) -> list[list[Node]]:
    out = []
    for i in range(batch.types.shape[0]):
        nodes = []
        for j in range(int(batch.lengths[i])):
            t = int(batch.types[i, j])
            nd = len(schema.node_types[t].discrete)
            nc = 2 * len(schema.node_types[t].points)
            nodes.append(Node(
                t,
                tuple(int(v) for v in batch.dvals[i, j, :nd]),
                tuple(float(v) for v in batch.cvals[i, j, :nc]),
            ))
        out.append(nodes)
    return out


# ---------------------------------------------------------------------------
# Fixed sinusoidal positional encodings


def sinusoid_1d(indices: np.ndarray, dim: int) -> np.ndarray:
    """Standard transformer encoding over integer positions."""
    if dim % 2:
        raise ValueError("encoding dimension must be even")
    indices = np.asarray(indices, dtype=np.float64)
    freq = np.exp(-np.log(10000.0) * np.arange(dim // 2) / max(dim // 2, 1))
    ang = indices[..., None] * freq
    out = np.zeros(indices.shape + (dim,), dtype=np.float64)
    out[..., 0::2] = np.sin(ang)
    out[..., 1::2] = np.cos(ang)
    return out


def sinusoid_2d(positions: np.ndarray, dim: int) -> np.ndarray:
    """Grid encoding: rows feed the first half of the dimensions, columns
    the second half."""
    if dim % 4:
        raise ValueError("2-D encoding needs dim divisible by 4")
    return np.concatenate(
        [sinusoid_1d(positions[..., 0], dim // 2), sinusoid_1d(positions[..., 1], dim // 2)],
        axis=-1,
    )
