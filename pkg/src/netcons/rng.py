"""Reproducible random stream for schedulers and Monte-Carlo draws.

Counter-mode SplitMix64: draw i is a pure function of (seed, i), so the
stream is identical across platforms, chunk sizes, and library versions
for the lifetime of the repo.  Bounded draws use a modulo map, whose bias
is below 2**-40 for every population size this harness supports.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    x &= MASK64
    x = (x ^ (x >> 30)) * _MIX1 & MASK64
    x = (x ^ (x >> 27)) * _MIX2 & MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Stable per-cell seed derivation (sweeps, repetition fan-out)."""
    out = mix64(seed)
    for key in keys:
        out = mix64(out ^ (key * _GAMMA & MASK64))
    return out


def _mix_array(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX2)
    x ^= x >> np.uint64(31)
    return x


class Stream:
    """Seeded counter-mode stream of 64-bit values with scalar/batch reads."""

    __slots__ = ("seed", "pos")

    def __init__(self, seed: int):
        self.seed = mix64(seed ^ _GAMMA)
        self.pos = 0

    def next_u64(self) -> int:
        value = mix64(self.seed + (self.pos + 1) * _GAMMA)
        self.pos += 1
        return value

    def next_below(self, bound: int) -> int:
        return self.next_u64() % bound

    def next_unit(self) -> float:
        """Uniform float in (0, 1]."""
        return 1.0 - (self.next_u64() >> 11) * 2.0**-53

    def chunk_u64(self, count: int) -> np.ndarray:
        base = np.uint64(self.seed)
        idx = np.arange(self.pos + 1, self.pos + count + 1, dtype=np.uint64)
        self.pos += count
        with np.errstate(over="ignore"):
            return _mix_array(base + idx * np.uint64(_GAMMA))

    def chunk_below(self, bound: int, count: int) -> np.ndarray:
        return self.chunk_u64(count) % np.uint64(bound)

    def chunk_unit(self, count: int) -> np.ndarray:
        """Uniform floats in (0, 1]."""
        return 1.0 - (self.chunk_u64(count) >> np.uint64(11)) * 2.0**-53

    def rewind(self, pos: int) -> None:
        """Reset the counter (used to hand back pre-fetched, unconsumed draws)."""
        self.pos = pos


def geometric(stream: Stream, p: float, count: int) -> np.ndarray:
    """Draw `count` geometric variates (trials to first success, >= 1)."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"success probability must be in (0, 1], got {p}")
    if p == 1.0:
        stream.pos += count
        return np.ones(count, dtype=np.int64)
    u = stream.chunk_unit(count)
    return np.floor(np.log(u) / np.log1p(-p)).astype(np.int64) + 1
