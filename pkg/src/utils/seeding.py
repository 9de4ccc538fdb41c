"""Seed derivation.

All randomness in the simulator comes from numpy Generators built here.
Sub-seeds are derived with numpy's SeedSequence, which hashes the root
seed together with a spawn key, so independent streams (one per noise
component, tracker, sweep point, ...) never depend on draw order.
"""

from __future__ import annotations

import zlib

import numpy as np

SeedKey = int | str


def _key_to_int(key: SeedKey) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if key < 0:
        raise ValueError(f"seed key must be non-negative, got {key}")
    return int(key)


def derive_seed_sequence(seed: int, *keys: SeedKey) -> np.random.SeedSequence:
    """Return the SeedSequence for (seed, *keys)."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.SeedSequence(seed, spawn_key=tuple(_key_to_int(k) for k in keys))


def derive_rng(seed: int, *keys: SeedKey) -> np.random.Generator:
    """Return an independent Generator for (seed, *keys).

    Usage:
        rng = derive_rng(42, "noise", 0)
        x = rng.standard_normal(100)
    """
    return np.random.default_rng(derive_seed_sequence(seed, *keys))


def derive_int_seed(seed: int, *keys: SeedKey) -> int:
    """Return a 63-bit integer seed for (seed, *keys)."""
    state = derive_seed_sequence(seed, *keys).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))
