"""Seeded randomness helpers.

Every random draw in the package goes through a PCG64 bit generator and only
uses ``Generator.random()`` (uniform doubles in [0, 1)). Categorical and
integer draws are derived here rather than via ``Generator.choice`` or
``Generator.integers`` so that streams do not depend on numpy's
version-specific sampling algorithms.
"""

from __future__ import annotations

from bisect import bisect_right
from itertools import accumulate
from typing import Sequence

import numpy as np

MASK64 = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))


def mix_seed(base_seed: int, *keys: int) -> int:
    """Derive a stable 64-bit child seed from ``base_seed`` and integer keys."""
    entropy = [int(base_seed) & MASK64, *(int(k) & MASK64 for k in keys)]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0])


def cumulative(weights: Sequence[float]) -> list[float]:
    return list(accumulate(float(w) for w in weights))


def draw_index(rng: np.random.Generator, cdf: Sequence[float]) -> int:
    """Draw an index from an (unnormalised) cumulative weight table."""
    total = cdf[-1]
    idx = bisect_right(cdf, rng.random() * total)
    # guard against u * total landing exactly on the last edge
    return min(idx, len(cdf) - 1)


def draw_int(rng: np.random.Generator, n: int) -> int:
    """Uniform integer in ``[0, n)``."""
    return min(int(rng.random() * n), n - 1)
