"""Reproducible 64-bit random streams for disorder sampling.

The generator is splitmix64 (Steele/Lea/Flood finalizer), fixed here so that a
64-bit seed fully determines a disorder realization on every platform.  Streams
are derived, not split: ``mix64(base_seed, realization, tag)`` folds each word
through one splitmix64 step, which keeps substreams for different realizations
and different disorder kinds statistically independent.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64_step(state: int) -> tuple[int, int]:
    """Advance one splitmix64 step; returns (new_state, output word)."""
    state = (state + _GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, (z ^ (z >> 31)) & _MASK64


def mix64(*words: int) -> int:
    """Mix integer words into one 64-bit substream seed.

    Each word is xor-folded into the accumulator and pushed through a
    splitmix64 step, so permuting call sites or evaluation order cannot
    alias two distinct (realization, tag) pairs in practice.
    """
    acc = 0
    for w in words:
        _, acc = _splitmix64_step(acc ^ (int(w) & _MASK64))
    return acc


class SplitMix64:
    """Single-consumer random stream over splitmix64.

    ``uniform_pm_half`` maps the top 53 bits of each output word onto the
    dyadic grid of [0, 1) and recenters, giving uniform draws on [-1/2, 1/2).
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK64

    def next_uint64(self) -> int:
        self._state, out = _splitmix64_step(self._state)
        return out

    def uniform_pm_half(self) -> float:
        # 53-bit mantissa scaling: (x >> 11) * 2**-53 is exact in binary64.
        return (self.next_uint64() >> 11) * 2.0**-53 - 0.5
