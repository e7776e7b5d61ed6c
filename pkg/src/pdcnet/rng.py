"""Deterministic, platform-independent random streams.

Seeding: four consecutive splitmix64 outputs from the 64-bit seed become the
xoshiro256** state. Every random draw in the package comes from here so splits,
initial weights and hyperparameter trials are reproducible in any language.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels

M64 = 0xFFFFFFFFFFFFFFFF


class Rng:
    """xoshiro256** generator seeded through splitmix64."""

    def __init__(self, seed: int):
        self.seed = seed & M64
        state = self.seed
        s = []
        for _ in range(4):
            state, out = _kernels.splitmix64_next(state)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        return _kernels.xoshiro_next(self._s)

    def random(self) -> float:
        """Uniform in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def uniform_array(self, n: int) -> np.ndarray:
        return _kernels.xoshiro_fill_uniform(self._s, n)

    def below(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def choice(self, options):
        return options[self.below(len(options))]

    def log_uniform(self, lo: float, hi: float) -> float:
        return math.exp(math.log(lo) + self.random() * (math.log(hi) - math.log(lo)))

    def shuffle(self, items: list) -> list:
        """Fisher-Yates, high index to low, in place; returns ``items``."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def permutation(self, n: int) -> list[int]:
        return self.shuffle(list(range(n)))

    def spawn(self, *labels: int) -> "Rng":
        """Independent child stream keyed by integer labels."""
        return Rng(_kernels.hash_ints([self.seed, *labels], 0x5EED))
