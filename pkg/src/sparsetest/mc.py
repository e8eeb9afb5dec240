"""Seed derivation and replicate scheduling for Monte-Carlo estimators.

Every replicate draws from a child SeedSequence derived as (seed, *key), so a
run is a pure function of (config, seed): serial and thread-pool execution
produce bit-identical results, and per-task streams are independent of
scheduling order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

__all__ = ["child_seed", "map_indexed"]


def child_seed(seed, *key: int) -> np.random.SeedSequence:
    """Derive a child SeedSequence from (seed, *key); composable with itself."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            entropy=seed.entropy, spawn_key=tuple(seed.spawn_key) + key
        )
    return np.random.SeedSequence(entropy=int(seed), spawn_key=key)


def map_indexed(fn, count: int, threads: int = 1) -> list:
    """[fn(0), ..., fn(count-1)], in index order regardless of worker count."""
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))
