"""Seeded PCG64 sub-streams.

Each purpose gets its own child stream of the master seed so, for example,
two estimators can share demand draws while using different shot noise.
"""

from __future__ import annotations

import numpy as np

DEMAND = 0
RELIABILITY = 1
SHOTS = 2
TRAINING = 3


def stream(seed: int, purpose: int, *path: int) -> np.random.Generator:
    """Generator for ``(seed, purpose, *path)``; ``path`` indexes cells, candidates, repetitions."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(purpose), *map(int, path)))
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(seed: int, *path: int) -> int:
    """Deterministic 63-bit seed derived from ``seed`` and integer coordinates."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(map(int, path)))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
