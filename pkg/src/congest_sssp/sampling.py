from __future__ import annotations

import math

import numpy as np

from .congest_sim.topology import Topology


def sample_virtual_nodes(topology: Topology | int, k: float, seed, source: int = 0) -> np.ndarray:
    """Each node joins with probability k/n; ``source`` always joins. Sorted ids."""
    n = topology if isinstance(topology, int) else topology.n
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    mask = rng.random(n) < k / n
    mask[source] = True
    return np.flatnonzero(mask).astype(np.int64)


def hop_budget(n: int, k: float, c_h: float = 3.0) -> int:
    """h = ceil(c_h * n * ln n / k): gap bound between sampled nodes on a path."""
    if n < 2:
        return 1
    return max(1, math.ceil(c_h * n * math.log(n) / k))


def seed_sequence(seed) -> np.random.SeedSequence:
    """Accept an int, a sequence of ints or a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (list, tuple)):
        return np.random.SeedSequence([int(x) for x in seed])
    return np.random.SeedSequence(int(seed))


def child_seed(seed, *path: int) -> np.random.SeedSequence:
    """Deterministic sub-seed addressed by a path of small integers."""
    base = seed_sequence(seed)
    return np.random.SeedSequence(base.entropy, spawn_key=tuple(base.spawn_key) + tuple(path))
