"""One-pass moments and batch-based confidence intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Z95 = 1.959963984540054
JACKKNIFE_BATCHES = 50


@dataclass
class Welford:
    """Running count, mean and sum of squared deviations.

    ``merge`` uses the pairwise update, so sharded accumulators combine to the
    same moments as a single pass (up to rounding; callers that need
    bit-identical output merge in a fixed order).
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, x: float) -> None:
        self.count += 1
        d = x - self.mean
        self.mean += d / self.count
        self.m2 += d * (x - self.mean)

    def extend(self, xs) -> None:
        for x in np.asarray(xs, dtype=float).tolist():
            self.push(x)

    def merge(self, other: "Welford") -> "Welford":
        if other.count == 0:
            return Welford(self.count, self.mean, self.m2)
        if self.count == 0:
            return Welford(other.count, other.mean, other.m2)
        n = self.count + other.count
        d = other.mean - self.mean
        mean = self.mean + d * other.count / n
        m2 = self.m2 + other.m2 + d * d * self.count * other.count / n
        return Welford(n, mean, m2)

    @property
    def variance(self) -> float:
        """Unbiased sample variance (``nan`` below two observations)."""
        return self.m2 / (self.count - 1) if self.count > 1 else float("nan")

    @property
    def sem(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 1 else float("nan")


def welford_of(xs) -> Welford:
    w = Welford()
    w.extend(xs)
    return w


def mean_ci(xs) -> tuple[float, float]:
    """Sample mean and 95% normal half-width."""
    w = welford_of(xs)
    if w.count < 2:
        return w.mean, float("nan")
    return w.mean, Z95 * w.sem


def proportion_ci(hits: int, total: int) -> tuple[float, float]:
    """Proportion and 95% normal half-width (Wald)."""
    if total <= 0:
        return float("nan"), float("nan")
    p = hits / total
    return p, Z95 * math.sqrt(max(p * (1 - p), 0.0) / total)


def _batches(xs: np.ndarray, batches: int) -> list[np.ndarray]:
    b = max(2, min(batches, len(xs)))
    return np.array_split(xs, b)


def jackknife_variance(xs, batches: int = JACKKNIFE_BATCHES) -> tuple[float, float]:
    """Unbiased sample variance with a delete-one-batch jackknife 95% half-width."""
    xs = np.asarray(xs, dtype=float)
    if len(xs) < 2:
        return float("nan"), float("nan")
    point = welford_of(xs).variance
    parts = _batches(xs, batches)
    b = len(parts)
    loo = np.array([np.var(np.concatenate(parts[:i] + parts[i + 1:]), ddof=1) for i in range(b)])
    se = math.sqrt((b - 1) / b * float(np.sum((loo - loo.mean()) ** 2)))
    return point, Z95 * se
