"""Seeded random streams.

Every replication draws from its own generator, derived from the tuple
``(base_seed, *indices)`` through :class:`numpy.random.SeedSequence`.  This
derivation is part of the results-file contract: a study row can be
reproduced from its seed and indices alone, in any order.
"""

from __future__ import annotations

import numpy as np

SEED_MASK = (1 << 64) - 1


def derive_stream(seed: int, *indices: int) -> np.random.Generator:
    """Return a PCG64 generator keyed by ``(seed, *indices)``.

    ``seed`` is reduced modulo ``2**64``; indices must be nonnegative.
    """
    if any(int(i) < 0 for i in indices):
        raise ValueError(f"stream indices must be nonnegative: {indices}")
    entropy = [int(seed) & SEED_MASK, *(int(i) for i in indices)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
