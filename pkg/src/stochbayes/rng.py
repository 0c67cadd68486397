"""Deterministic per-component random streams derived from one master seed."""

from __future__ import annotations

import secrets
import zlib

import numpy as np


def fresh_seed() -> int:
    """Entropy-drawn seed that fits an unsigned 64-bit integer."""
    return secrets.randbits(64)


def substream(seed: int, *keys: str) -> np.random.Generator:
    """Generator keyed by ``(seed, keys...)``.

    Keys are hashed, so a component's stream does not depend on how many
    other components exist or in which order they were declared.
    """
    spawn_key = tuple(zlib.crc32(k.encode("utf-8")) for k in keys)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def derive_seed(seed: int, *keys: str) -> int:
    """Child integer seed, for handing to code that wants a plain seed."""
    return int(substream(seed, *keys).integers(0, 2**63))
