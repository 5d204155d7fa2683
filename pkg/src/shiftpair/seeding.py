"""Counter-based seed splitting.

Every consumer of randomness asks for a named stream derived from the one
user seed, so adding a new check never shifts the samples of another.
"""
from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, name: str) -> np.random.Generator:
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(key,)))


def as_rng(seed_or_rng) -> np.random.Generator:
    """Accept either an integer seed or an existing Generator."""
    return np.random.default_rng(seed_or_rng)
