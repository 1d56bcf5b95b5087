"""Deterministic random streams.

All sampling in this package runs through numpy's Philox bit generator, a
64-bit counter-based PRNG, keyed directly by the user-visible seed.  That
makes every generated artifact a pure, platform-independent function of
(config, seed): no global state, no OS entropy, identical streams on every
machine.
"""

from __future__ import annotations

import hashlib

import numpy as np

_KEY_MASK = (1 << 128) - 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _KEY_MASK))


def derive_seed(base: int, *parts) -> int:
    """Stable 64-bit sub-seed for a named stream, e.g. per-sample styles or
    per-epoch permutations, so independent streams never collide."""
    h = hashlib.blake2b(repr((int(base), parts)).encode("ascii"), digest_size=8)
    return int.from_bytes(h.digest(), "little")
