"""Counter-based 64-bit random numbers (SplitMix64 mixing).

Value k of the stream with key K is mix64(K + (k + 1) * GAMMA). The key for
Monte Carlo trial i under master seed S is the i-th value of the stream keyed
by S. Nothing depends on call order across trials, so any partition of trials
over workers reproduces the same numbers on every platform.
"""
from __future__ import annotations

import math

MASK64 = 0xFFFF_FFFF_FFFF_FFFF
GAMMA = 0x9E37_79B9_7F4A_7C15
MIX_C1 = 0xBF58_476D_1CE4_E5B9
MIX_C2 = 0x94D0_49BB_1331_11EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_C1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_C2) & MASK64
    return z ^ (z >> 31)


def counter_value(key: int, counter: int) -> int:
    return mix64(key + (counter + 1) * GAMMA)


def trial_key(master_seed: int, trial_index: int) -> int:
    return counter_value(master_seed & MASK64, trial_index)


class CounterRNG:
    def __init__(self, key: int, counter: int = 0):
        self.key = key & MASK64
        self.counter = counter

    @classmethod
    def for_trial(cls, master_seed: int, trial_index: int) -> "CounterRNG":
        return cls(trial_key(master_seed, trial_index))

    def next_u64(self) -> int:
        v = counter_value(self.key, self.counter)
        self.counter += 1
        return v

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def geometric(self, p: float) -> int:
        """Trials up to and including the first success, support {1, 2, ...}."""
        if p >= 1:
            return 1
        if p <= 0:
            raise ValueError("geometric success probability must be positive")
        u = 1.0 - self.random()  # (0, 1]
        k = math.ceil(math.log(u) / math.log1p(-p))
        return max(1, k)
