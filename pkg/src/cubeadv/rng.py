"""Reproducible integer sampling on top of the PCG64 raw output stream.

Only ``PCG64.random_raw`` is used: numpy guarantees the bit generator's raw
stream is stable across versions and platforms, whereas the higher level
``Generator`` methods are not covered by that promise.  Bounded integers use
Lemire's multiply-shift with exact rejection, so draws are unbiased.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.random import PCG64

_MASK64 = (1 << 64) - 1


class Pcg64Stream:
    def __init__(self, seed: int):
        self.seed = int(seed)
        self._bg = PCG64(self.seed)
        self._buf: list[int] = []

    def next_u64(self) -> int:
        if not self._buf:
            self._buf = [int(x) for x in self._bg.random_raw(1024)][::-1]
        return self._buf.pop()

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = ((1 << 64) - n) % n
        while True:
            m = self.next_u64() * n
            if (m & _MASK64) >= threshold:
                return m >> 64

    def sample(self, population: Sequence[int], r: int) -> list[int]:
        """First ``r`` entries of a partial Fisher-Yates shuffle."""
        pool = list(population)
        n = len(pool)
        if not 0 <= r <= n:
            raise ValueError(f"cannot sample {r} of {n}")
        for i in range(r):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:r]

    def choice(self, seq: Sequence):
        return seq[self.below(len(seq))]

    def below_array(self, n: int, size: int) -> np.ndarray:
        """``size`` uniform integers in ``[0, n)`` for ``n < 2**32``.

        Uses the high 32 bits of each raw draw, with exact rejection.
        """
        if not 0 < n < (1 << 32):
            raise ValueError("n must lie in [1, 2**32)")
        threshold = np.uint64(((1 << 32) - n) % n)
        nn = np.uint64(n)
        out = np.empty(size, dtype=np.int64)
        filled = 0
        while filled < size:
            x = self._bg.random_raw(size - filled) >> np.uint64(32)
            m = x * nn
            keep = (m & np.uint64(0xFFFFFFFF)) >= threshold
            vals = (m[keep] >> np.uint64(32)).astype(np.int64)
            out[filled : filled + len(vals)] = vals
            filled += len(vals)
        return out
