"""Module contains splittable seeding helpers.

Every random stream is keyed by a base seed and a tuple of counters, so a
replicate or a simulation draws the same numbers whichever worker runs it.
"""
from __future__ import annotations

import numpy as np


__all__ = (
    "make_rng",
    "derive_seed",
)


def _sequence(base_seed: int, keys: tuple[int, ...]) -> np.random.SeedSequence:
    if base_seed < 0 or any(key < 0 for key in keys):
        msg = "Seeds and seed keys must be non-negative."
        raise ValueError(msg)
    return np.random.SeedSequence(base_seed, spawn_key=keys)


def make_rng(base_seed: int, *keys: int) -> np.random.Generator:
    """Create Philox generator for (base_seed, keys)."""
    return np.random.Generator(np.random.Philox(_sequence(base_seed, keys)))


def derive_seed(base_seed: int, *keys: int) -> int:
    """Derive child integer seed for (base_seed, keys)."""
    state = _sequence(base_seed, keys).generate_state(1, dtype=np.uint64)
    return int(state[0])
