"""Seeding helpers for reproducible, parallel-safe Monte Carlo.

All randomness in the package is derived from ``numpy.random.SeedSequence``
trees: a study seeds replication ``i`` with the substream ``(seed, i)``, and a
single simulation splits its stream into process-noise / state-outlier /
observation-outlier substreams.  Substreams are built by extending the spawn
key directly, so deriving a child never mutates the parent and the same
``(seed, key)`` pair always yields the same generator.
"""

import numpy as np


def as_seedseq(seed):
    """Coerce an int (or an existing SeedSequence) to a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def substream(seed, *key):
    """Child SeedSequence of ``seed`` at spawn position ``key`` (pure, repeatable)."""
    ss = as_seedseq(seed)
    return np.random.SeedSequence(entropy=ss.entropy,
                                  spawn_key=tuple(ss.spawn_key) + tuple(key))


def rng_at(seed, *key):
    """Generator seeded at the given substream."""
    return np.random.default_rng(substream(seed, *key) if key else as_seedseq(seed))
