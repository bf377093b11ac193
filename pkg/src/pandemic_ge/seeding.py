"""Hierarchical seed derivation: master -> run -> generation -> slot -> episode.

Every parallel unit gets its own seed from its position in the hierarchy, so
results never depend on scheduling order.
"""

from __future__ import annotations

import numpy as np

# first path element separating independent streams under one master seed
EVOLUTION_STREAM = 0
TEST_STREAM = 1
COMPARE_STREAM = 2


def derive_seed(master: int, *path: int) -> int:
    """A 63-bit seed that depends only on ``master`` and the integer ``path``."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def agent_rng(episode_seed: int) -> np.random.Generator:
    """Action-selection stream for an episode, disjoint from the simulator's stream."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(episode_seed), spawn_key=(1,)))


def episode_seeds(master: int, n: int, *path: int) -> list[int]:
    return [derive_seed(master, *path, e) for e in range(n)]
