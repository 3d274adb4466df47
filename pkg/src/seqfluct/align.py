"""Optimal alignment score under a general scoring scheme.

The score of an alignment with ``k`` aligned pairs is
``sum S(x_rho_i, y_tau_i) + delta * (n - k)``. Writing it as
``delta * n + sum (S - delta)`` turns the maximisation into the usual
three-way recurrence on cell gains ``S(a, b) - delta`` where skipping a
letter is free, with ``D[0][.] = D[.][0] = 0`` admitting the empty alignment.

Two implementations are provided: a row-vectorised dynamic program for any
scheme (also batched over many pairs), and a bit-parallel column update for
the 0/1 identity scheme. :func:`brute_force_score` enumerates every alignment
literally and is used only as an oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import Sequence, ScoringScheme
from .errors import DimensionError, ResourceGuardError, ValidationError

BRUTE_FORCE_MAX_N = 12


@dataclass(frozen=True)
class AlignmentScore:
    value: float
    n: int

    def __float__(self) -> float:
        return float(self.value)


def _check_pair(x: Sequence, y: Sequence, scheme: ScoringScheme | None = None) -> int:
    if len(x) != len(y):
        raise ValidationError(f"sequences have different lengths {len(x)} and {len(y)}")
    if x.alphabet != y.alphabet:
        raise DimensionError("sequences use different alphabets")
    if scheme is not None and scheme.alphabet != x.alphabet:
        raise DimensionError("scheme alphabet differs from the sequences' alphabet")
    return len(x)


def _as_number(value, integral: bool):
    return int(round(value)) if integral else float(value)


# -- general dynamic program --------------------------------------------------

def _gain_table(scheme: ScoringScheme) -> np.ndarray:
    gain = scheme.matrix - scheme.delta
    if scheme.is_integral:
        return gain.astype(np.int64)
    return gain


def dp_scores(X: np.ndarray, Y: np.ndarray, scheme: ScoringScheme) -> np.ndarray:
    """Optimal scores for a batch of pairs given as ``(B, n)`` index arrays.

    Two rows of the table are kept; each row is the running maximum of
    ``max(D[i-1][j], D[i-1][j-1] + gain(x_i, y_j))``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.int64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.int64))
    if X.shape != Y.shape:
        raise ValidationError(f"batch shapes differ: {X.shape} vs {Y.shape}")
    B, n = X.shape
    gain = _gain_table(scheme)
    prev = np.zeros((B, n + 1), dtype=gain.dtype)
    cand = np.empty_like(prev)
    for i in range(n):
        g = gain[X[:, i][:, None], Y]
        cand[:, 0] = 0
        np.maximum(prev[:, 1:], prev[:, :-1] + g, out=cand[:, 1:])
        prev = np.maximum.accumulate(cand, axis=1)
    return scheme.delta * n + prev[:, n]


# -- bit-parallel LCS -----------------------------------------------------------

def _match_masks(y: np.ndarray, k: int) -> list[int]:
    masks = []
    for c in range(k):
        bits = np.packbits(y == c, bitorder="little")
        masks.append(int.from_bytes(bits.tobytes(), "little"))
    return masks


def lcs_arrays(x: np.ndarray, y: np.ndarray, k: int) -> int:
    """LCS length of two index arrays over an alphabet of size ``k``.

    Column-state update on a single arbitrary-precision integer: bit ``j`` of
    ``V`` is cleared where the row-to-row LCS value increases.
    """
    n = len(y)
    if n == 0 or len(x) == 0:
        return 0
    full = (1 << n) - 1
    masks = _match_masks(np.asarray(y), k)
    v = full
    for c in np.asarray(x).tolist():
        u = v & masks[c]
        v = ((v + u) | (v - u)) & full
    return n - v.bit_count() if hasattr(v, "bit_count") else n - bin(v).count("1")


def _lcs_batch_word(X: np.ndarray, Y: np.ndarray, k: int) -> np.ndarray:
    B, n = X.shape
    full = np.uint64((1 << n) - 1)
    weights = (np.uint64(1) << np.arange(n, dtype=np.uint64))
    masks = np.stack([((Y == c).astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
                      for c in range(k)], axis=1)
    v = np.full(B, full, dtype=np.uint64)
    rows = np.arange(B)
    for i in range(n):
        u = v & masks[rows, X[:, i]]
        v = ((v + u) | (v - u)) & full
    return n - np.bitwise_count(v).astype(np.int64)


def lcs_batch(X: np.ndarray, Y: np.ndarray, k: int) -> np.ndarray:
    """LCS lengths for a ``(B, n)`` batch. One machine word per pair when n <= 63."""
    X = np.atleast_2d(np.asarray(X, dtype=np.int64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.int64))
    if X.shape != Y.shape:
        raise ValidationError(f"batch shapes differ: {X.shape} vs {Y.shape}")
    B, n = X.shape
    if n == 0:
        return np.zeros(B, dtype=np.int64)
    if n <= 63 and hasattr(np, "bitwise_count"):
        return _lcs_batch_word(X, Y, k)
    return np.array([lcs_arrays(X[b], Y[b], k) for b in range(B)], dtype=np.int64)


def lcs_rows_vs(rows: np.ndarray, fixed: np.ndarray, k: int) -> np.ndarray:
    """LCS of every row of ``rows`` against one fixed string.

    All rows are packed into one integer, each in its own ``width + 1`` bit
    segment. The spare top bit of a segment absorbs the carry of ``v + u``
    (``v - u`` never borrows since ``u`` is a subset of ``v``), so the
    segments evolve independently under one shared update per symbol of
    ``fixed``.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    fixed = np.asarray(fixed, dtype=np.int64)
    m, w = rows.shape
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    if w == 0 or len(fixed) == 0:
        return np.zeros(m, dtype=np.int64)
    pad = np.zeros((m, 1), dtype=bool)

    def pack(bits: np.ndarray) -> int:
        flat = np.concatenate([bits, pad], axis=1).ravel()
        return int.from_bytes(np.packbits(flat, bitorder="little").tobytes(), "little")

    masks = [pack(rows == c) for c in range(k)]
    full = pack(np.ones((m, w), dtype=bool))
    v = full
    for c in fixed.tolist():
        u = v & masks[c]
        v = ((v + u) | (v - u)) & full
    nbytes = (m * (w + 1) + 7) // 8
    bits = np.unpackbits(np.frombuffer(v.to_bytes(nbytes, "little"), dtype=np.uint8), bitorder="little")
    ones = bits[: m * (w + 1)].reshape(m, w + 1)[:, :w].sum(axis=1)
    return w - ones.astype(np.int64)


def score_arrays(x: np.ndarray, y: np.ndarray, scheme: ScoringScheme):
    """Score of one pair of index arrays, dispatching to the LCS fast path."""
    if scheme.is_lcs:
        return lcs_arrays(x, y, len(scheme.alphabet))
    value = dp_scores(x[None, :], y[None, :], scheme)[0]
    return _as_number(value, scheme.is_integral)


def score_batch(X: np.ndarray, Y: np.ndarray, scheme: ScoringScheme) -> np.ndarray:
    if scheme.is_lcs:
        return lcs_batch(X, Y, len(scheme.alphabet))
    return dp_scores(X, Y, scheme)


# -- public API -------------------------------------------------------------------

def optimal_score(x: Sequence, y: Sequence, scheme: ScoringScheme) -> AlignmentScore:
    """Maximum alignment score ``L(x, y)`` under ``scheme``."""
    n = _check_pair(x, y, scheme)
    return AlignmentScore(score_arrays(x.array, y.array, scheme), n)


def lcs_length(x: Sequence, y: Sequence) -> int:
    _check_pair(x, y)
    return lcs_arrays(x.array, y.array, len(x.alphabet))


def brute_force_score(x: Sequence, y: Sequence, scheme: ScoringScheme) -> AlignmentScore:
    """Maximum over every pair of increasing index tuples, enumerated literally.

    Refuses ``n > 12``: the number of alignments is ``C(2n, n)``.
    """
    n = _check_pair(x, y, scheme)
    if n > BRUTE_FORCE_MAX_N:
        raise ResourceGuardError(f"brute force refused for n={n} > {BRUTE_FORCE_MAX_N}")
    S = scheme.matrix
    xa, ya = x.array, y.array
    best = scheme.delta * n  # k = 0
    for k in range(1, n + 1):
        idx = np.array(list(combinations(range(n), k)), dtype=np.int64)
        xs = xa[idx]  # (C, k) letters picked from x
        ys = ya[idx]
        # total[r, t] = sum_i S[xs[r, i], ys[t, i]]
        total = np.zeros((len(idx), len(idx)))
        for i in range(k):
            total += S[xs[:, i][:, None], ys[:, i][None, :]]
        best = max(best, float(total.max()) + scheme.delta * (n - k))
    return AlignmentScore(_as_number(best, scheme.is_integral), n)
