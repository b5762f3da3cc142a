"""Deterministic, named random streams.

Every randomised step in the library draws from a SeededRng. A stream is
identified by ``(seed, label)``; the generator state is derived by hashing
both, so distinct labels give statistically independent streams and the
same pair reproduces the same draw sequence on every platform (NumPy's
PCG64 bit streams are stable across versions and architectures).

Streams are single-owner: spawn a child per stage instead of sharing one
generator between stages, otherwise draw order leaks between stages and
reruns stop being comparable.
"""

from __future__ import annotations

import hashlib

import numpy as np


class SeededRng:
    def __init__(self, seed: int, label: str = "root"):
        self.seed = int(seed)
        self.label = label
        digest = hashlib.sha256(f"{self.seed}\x1f{label}".encode()).digest()
        self._gen = np.random.Generator(
            np.random.PCG64(int.from_bytes(digest[:16], "big"))
        )

    def __repr__(self):
        return f"SeededRng(seed={self.seed}, label={self.label!r})"

    def spawn(self, label: str) -> "SeededRng":
        """Independent child stream named ``parent/label``."""
        return SeededRng(self.seed, f"{self.label}/{label}")

    def random(self) -> float:
        return float(self._gen.random())

    def integer(self, low: int, high: int) -> int:
        """Uniform integer in the half-open range [low, high)."""
        return int(self._gen.integers(low, high))

    def bernoulli(self, p: float) -> bool:
        return bool(self._gen.random() < p)

    def mask(self, count: int, p: float) -> np.ndarray:
        """Boolean vector, each entry independently true with probability p."""
        return self._gen.random(count) < p

    def uniforms(self, count: int) -> np.ndarray:
        return self._gen.random(count)

    def subset(self, items, k: int):
        """Uniform k-subset of ``items`` without replacement, sorted."""
        items = list(items)
        if not 0 <= k <= len(items):
            raise ValueError(f"cannot draw {k} items from {len(items)}")
        idx = self._gen.choice(len(items), size=k, replace=False)
        return tuple(sorted(items[i] for i in idx))

    def permutation(self, n: int):
        return tuple(int(x) for x in self._gen.permutation(n))

    def shuffled(self, items):
        items = list(items)
        self._gen.shuffle(items)
        return items

    def choice(self, items):
        items = list(items)
        return items[int(self._gen.integers(0, len(items)))]
