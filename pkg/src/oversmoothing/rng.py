"""Reproducible random streams keyed by strings.

Every random tensor in an experiment is drawn from a stream whose seed is the
64-bit FNV-1a hash of a key such as ``"gcn:7:12"`` (method, seed, layer).  The
generator is SplitMix64, which is counter based: output ``i`` of a stream is a
pure function of ``(seed, i)``, so a block of draws vectorizes in numpy and any
language can reproduce the exact bit stream from the constants below.

    z  = seed + i * 0x9E3779B97F4A7C15          (i = 1, 2, ...)
    z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)                          (all arithmetic mod 2**64)

Uniform doubles take the top 53 bits.  Normal variates use Box-Muller on
consecutive pairs of uniforms, emitting the cosine branch then the sine branch.
"""

from __future__ import annotations

import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)


def fnv1a_64(text: str) -> int:
    """64-bit FNV-1a hash of the UTF-8 bytes of ``text``."""
    h = FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


class SplitMix64:
    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.counter = 0

    def next_u64(self, count: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + count + 1, dtype=np.uint64)
        self.counter += count
        z = np.uint64(self.seed) + idx * GOLDEN
        z = (z ^ (z >> np.uint64(30))) * MIX1
        z = (z ^ (z >> np.uint64(27))) * MIX2
        return z ^ (z >> np.uint64(31))

    def random(self, count: int) -> np.ndarray:
        """Uniform doubles in [0, 1)."""
        return (self.next_u64(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform(self, shape, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        shape = _as_shape(shape)
        u = self.random(int(np.prod(shape, dtype=np.int64)))
        return (low + (high - low) * u).reshape(shape)

    def normal(self, shape) -> np.ndarray:
        shape = _as_shape(shape)
        count = int(np.prod(shape, dtype=np.int64))
        pairs = (count + 1) // 2
        u = self.random(2 * pairs).reshape(pairs, 2)
        # 1 - u keeps the log argument in (0, 1]
        radius = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
        angle = 2.0 * np.pi * u[:, 1]
        z = np.empty((pairs, 2))
        z[:, 0] = radius * np.cos(angle)
        z[:, 1] = radius * np.sin(angle)
        return z.reshape(-1)[:count].reshape(shape)


def stream(key: str) -> SplitMix64:
    return SplitMix64(fnv1a_64(key))


def _as_shape(shape) -> tuple[int, ...]:
    if isinstance(shape, (int, np.integer)):
        return (int(shape),)
    return tuple(int(s) for s in shape)
