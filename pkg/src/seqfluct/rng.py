"""Splittable, counter-based random streams.

A :class:`RandomStream` is a numpy ``Generator`` driven by the Philox
counter-based bit generator, keyed by ``(seed, path)``. ``split(i)`` derives
an independent child stream whose state depends only on the seed and the
path of split indices, so sample ``i`` sees the same random numbers no matter
which worker runs it or in what order.
"""
from __future__ import annotations

import numpy as np

SEED_MASK = (1 << 64) - 1


class RandomStream:
    __slots__ = ("seed", "path", "_gen")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        seed = int(seed)
        if not 0 <= seed <= SEED_MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = seed
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def split(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, self.path + (int(index),))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def choice(self, k: int, size=None, p=None):
        return self._gen.choice(k, size=size, p=p)

    def random(self, size=None):
        return self._gen.random(size)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, path={self.path})"


def substream(seed: int, index: int) -> RandomStream:
    """Stream for sample ``index`` of a run seeded with ``seed``."""
    return RandomStream(seed, (int(index),))
