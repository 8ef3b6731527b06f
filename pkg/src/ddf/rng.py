"""Seedable deterministic random number generation.

The generator is SplitMix64 (Steele, Lea & Flood's mix function): the
64-bit state advances by the golden-gamma constant and each output is the
avalanche of the new state. It is tiny, has no platform-dependent state,
and a given seed replays the identical stream everywhere, which is what
makes generated models reproducible from their recorded seed.

Sampling order matters for reproducibility: callers document the order in
which they draw, and derived streams are forked with `derive` rather than
by sharing one stream across loops.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

T = TypeVar("T")


def _avalanche(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 stream seeded with a 64-bit unsigned integer."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return _avalanche(self._state)

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n); floor of n * random()."""
        if n <= 0:
            raise ValueError("randrange() arg must be positive")
        return min(int(self.random() * n), n - 1)

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.randrange(len(seq))]


def derive(seed: int, *salts: int) -> int:
    """Fork a child seed from (seed, salts); stable hash-combine."""
    x = seed & _MASK64
    for salt in salts:
        x = _avalanche((x + _GAMMA) & _MASK64 ^ _avalanche((salt + 1) & _MASK64))
    return x
