"""Deterministic random streams.

Every random choice in the pipeline draws from a numpy Generator seeded by
hashing the single campaign seed together with a purpose path, e.g.
substream(seed, "forge", "csr", 3).  Streams are therefore independent of
each other and of the order in which the pipeline visits its work items.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, *path: object) -> int:
    key = str(int(seed)) + "/" + "/".join(str(p) for p in path)
    digest = hashlib.sha256(key.encode()).digest()
    return int.from_bytes(digest[:8], "little")


def substream(seed: int, *path: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *path))
