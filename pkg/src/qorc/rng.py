"""Seeded random streams.

Every random draw in the package goes through :func:`make_rng`, which keys a
Philox-4x64 counter-based generator directly with a 64-bit integer. Philox
streams are defined by the key alone, so a seed produces the same numbers on
every platform. Child streams (one per image, per epoch, ...) are keyed with
:func:`mix64`, the SplitMix64 finalizer applied to ``seed`` and ``index``.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix64(seed: int, index: int) -> int:
    """Derive a 64-bit child key from ``(seed, index)``."""
    return _splitmix64(_splitmix64(int(seed) & MASK64) ^ (int(index) & MASK64))


def make_rng(seed: int, index: int | None = None) -> np.random.Generator:
    """Philox generator keyed by ``seed`` (or by ``mix64(seed, index)``)."""
    key = int(seed) & MASK64 if index is None else mix64(seed, index)
    return np.random.Generator(np.random.Philox(key=key))
