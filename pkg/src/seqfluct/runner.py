"""Deterministic parallel evaluation of per-sample kernels.

A kernel is a picklable callable ``kernel(start, stop)`` returning a tuple of
arrays with one entry per sample index in ``[start, stop)``. Each kernel
derives the randomness for sample ``i`` from its own substream, so splitting
the index range across workers cannot change any value; chunks are
concatenated in index order, so aggregation is order-independent too.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

DEFAULT_CHUNK = 500


def chunk_ranges(samples: int, chunk: int = DEFAULT_CHUNK) -> list[tuple[int, int]]:
    return [(s, min(s + chunk, samples)) for s in range(0, samples, chunk)]


def _call(args):
    kernel, start, stop = args
    return kernel(start, stop)


def run_kernel(kernel, samples: int, workers: int = 1, chunk: int = DEFAULT_CHUNK) -> tuple[np.ndarray, ...]:
    """Evaluate ``kernel`` over ``range(samples)`` and concatenate the outputs."""
    if samples < 0:
        raise ValueError("samples must be >= 0")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    ranges = chunk_ranges(samples, chunk)
    if workers == 1 or len(ranges) <= 1:
        parts = [kernel(s, e) for s, e in ranges]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_call, [(kernel, s, e) for s, e in ranges]))
    if not parts:
        parts = [kernel(0, 0)]
    return tuple(np.concatenate(cols) for cols in zip(*parts))
