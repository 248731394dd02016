"""Stable seed derivation.

Python's ``hash`` is salted per process, so seeds are derived from a
BLAKE2b digest of the parts' ``repr`` instead.
"""

from __future__ import annotations

import hashlib

import numpy as np

SEED_BITS = 63


def derive_seed(*parts) -> int:
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode("utf8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "big") >> (64 - SEED_BITS)


def spawn_seed(rng: np.random.Generator) -> int:
    """Draw a fresh integer seed from ``rng``."""
    return int(rng.integers(0, 2**SEED_BITS))
