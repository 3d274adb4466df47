"""Random transformations of a sequence pair and their exact outcome laws.

``LetterSwap(a, b)`` turns one uniformly chosen occurrence of ``a`` in the
concatenation ``x·y`` into ``b``. It raises ``U = N_b`` by one and leaves
``V = N_a + N_b`` alone.

``BlockTransform(l)`` picks one uniform block of length ``l-1`` and one
uniform block of length ``l+1`` in ``x`` and makes both of length ``l``;
everything in between shifts by one place and ``y`` is untouched. The block
count and trailing run stay fixed while ``U`` grows by four.

Array-level helpers (``*_arrays``) work on integer index arrays and build all
outcomes at once; the ``Sequence``-level functions wrap them.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .align import _check_pair, dp_scores, lcs_rows_vs, score_arrays
from .core import Sequence, SequencePair, ScoringScheme
from .errors import TransformInapplicableError, ValidationError
from .genmodels import block_stats_array, run_lengths
from .rng import RandomStream

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class LetterSwap:
    a: int | str
    b: int | str

    k0 = 1

    def __post_init__(self):
        if self.a == self.b:
            raise ValidationError("LetterSwap needs two different letters", key="swap")

    def letters(self, alphabet) -> tuple[int, int]:
        ia, ib = alphabet.index(self.a), alphabet.index(self.b)
        if ia == ib:
            raise ValidationError("LetterSwap needs two different letters", key="swap")
        return ia, ib


@dataclass(frozen=True)
class BlockTransform:
    l: int

    k0 = 4

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 2:
            raise ValidationError(f"block transform needs l >= 2, got {self.l}", key="l")


Transform = LetterSwap | BlockTransform


@dataclass(frozen=True)
class OutcomeSet:
    items: tuple[tuple[SequencePair, float], ...]

    def __post_init__(self):
        probs = [p for _, p in self.items]
        if any(p <= 0 for p in probs):
            raise ValidationError("outcome probabilities must be positive")
        if abs(sum(probs) - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"outcome probabilities sum to {sum(probs)!r}")

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def as_dict(self) -> dict[tuple, float]:
        return {(p.x.data, p.y.data): prob for p, prob in self.items}


# -- array-level outcome construction ---------------------------------------------------

def swap_outcome_arrays(x: np.ndarray, y: np.ndarray, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``v - u`` raw outcomes of a letter swap, as ``(X, Y)`` of shape ``(m, n)``.

    Row ``i`` changes the ``i``-th occurrence of ``a`` in ``x·y``.
    """
    n = len(x)
    pos = np.flatnonzero(np.concatenate([x, y]) == a)
    m = len(pos)
    if m == 0:
        raise TransformInapplicableError(f"no occurrence of letter {a} in either sequence")
    X = np.repeat(x[None, :], m, axis=0)
    Y = np.repeat(y[None, :], m, axis=0)
    rows = np.arange(m)
    in_x = pos < n
    X[rows[in_x], pos[in_x]] = b
    Y[rows[~in_x], pos[~in_x] - n] = b
    return X, Y


def _block_layout(x: np.ndarray, l: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    block_stats_array(x, l)  # validates the block structure
    runs = run_lengths(x)
    blocks = runs[:-1]
    starts = np.concatenate(([0], np.cumsum(blocks)))[:-1] if len(blocks) else np.zeros(0, np.int64)
    short = np.flatnonzero(blocks == l - 1)
    long = np.flatnonzero(blocks == l + 1)
    return starts, short, long


def block_outcome_arrays(x: np.ndarray, l: int) -> np.ndarray:
    """All ``b1 * b3`` raw outcomes of the block transformation on ``x``, shape ``(m, n)``.

    Row order: short block index major, long block index minor.
    """
    starts, short, long = _block_layout(np.asarray(x), l)
    if len(short) == 0 or len(long) == 0:
        raise TransformInapplicableError(
            f"need a block of length {l - 1} and one of length {l + 1} (have {len(short)} and {len(long)})")
    i = np.repeat(short, len(long))
    j = np.tile(long, len(short))
    return _shift_rows(np.asarray(x), starts, i, j, l)


def _shift_rows(x: np.ndarray, starts: np.ndarray, i: np.ndarray, j: np.ndarray, l: int) -> np.ndarray:
    # i < j: the short block grows at its end and everything up to the long
    # block's end moves right by one. i > j: mirror image, moving left.
    n = len(x)
    end_short = starts[i] + (l - 1)
    end_long = starts[j] + (l + 1)
    fwd = i < j
    lo = np.where(fwd, end_short, end_long - 1)
    hi = np.where(fwd, end_long, end_short - 1)
    p = np.arange(n)[None, :]
    inside = (p >= lo[:, None]) & (p < hi[:, None])
    step = np.where(fwd, -1, 1)[:, None]
    return x[p + inside * step]


def outcome_arrays(x: np.ndarray, y: np.ndarray, t: Transform) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(t, LetterSwap):
        a, b = t.a, t.b
        if not (isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer))):
            raise ValidationError("array-level LetterSwap needs integer letters")
        return swap_outcome_arrays(x, y, int(a), int(b))
    X = block_outcome_arrays(x, t.l)
    return X, np.repeat(np.asarray(y)[None, :], len(X), axis=0)


def apply_arrays(x: np.ndarray, y: np.ndarray, t: Transform, rng: RandomStream) -> tuple[np.ndarray, np.ndarray]:
    """One random outcome without building the others."""
    if isinstance(t, LetterSwap):
        a, b = int(t.a), int(t.b)
        n = len(x)
        pos = np.flatnonzero(np.concatenate([x, y]) == a)
        if len(pos) == 0:
            raise TransformInapplicableError(f"no occurrence of letter {a} in either sequence")
        p = int(pos[rng.integers(len(pos))])
        x, y = x.copy(), y.copy()
        if p < n:
            x[p] = b
        else:
            y[p - n] = b
        return x, y
    starts, short, long = _block_layout(x, t.l)
    if len(short) == 0 or len(long) == 0:
        raise TransformInapplicableError(
            f"need a block of length {t.l - 1} and one of length {t.l + 1} (have {len(short)} and {len(long)})")
    pick = int(rng.integers(len(short) * len(long)))
    i, j = short[pick // len(long)], long[pick % len(long)]
    return _shift_rows(x, starts, np.array([i]), np.array([j]), t.l)[0], y


def score_outcomes(x: np.ndarray, y: np.ndarray, X: np.ndarray, Y: np.ndarray, scheme: ScoringScheme) -> np.ndarray:
    """Scores of the outcome rows ``(X[i], Y[i])``, exploiting shared rows for LCS."""
    if not scheme.is_lcs:
        return dp_scores(X, Y, scheme)
    k = len(scheme.alphabet)
    out = np.empty(len(X), dtype=np.int64)
    y_same = (Y == y[None, :]).all(axis=1)
    x_same = (X == x[None, :]).all(axis=1)
    out[y_same] = lcs_rows_vs(X[y_same], y, k)
    rest = ~y_same
    if np.any(rest & ~x_same):
        raise ValidationError("outcome rows change both sequences")
    # LCS is symmetric, so rows that keep x are scored with x as the fixed string
    out[rest] = lcs_rows_vs(Y[rest], x, k)
    return out


def outcome_gains(x: np.ndarray, y: np.ndarray, t: Transform, scheme: ScoringScheme):
    """``(L(z), array of L(z~) - L(z))`` over the raw (equiprobable) outcomes."""
    X, Y = outcome_arrays(x, y, t)
    base = score_arrays(x, y, scheme)
    return base, score_outcomes(x, y, X, Y, scheme) - base


# -- sequence-level API ----------------------------------------------------------------

def _resolve(t: Transform, z: SequencePair) -> Transform:
    if isinstance(t, LetterSwap):
        a, b = t.letters(z.x.alphabet)
        return LetterSwap(a, b)
    if len(z.x.alphabet) != 2:
        raise ValidationError("the block transformation acts on binary sequences")
    return t


def _pair(alphabet, xa, ya) -> SequencePair:
    return SequencePair(Sequence.from_array(alphabet, xa), Sequence.from_array(alphabet, ya))


def apply(z: SequencePair, t: Transform, rng: RandomStream) -> SequencePair:
    _check_pair(z.x, z.y)
    xa, ya = apply_arrays(z.x.array, z.y.array, _resolve(t, z), rng)
    return _pair(z.x.alphabet, xa, ya)


def outcomes(z: SequencePair, t: Transform) -> OutcomeSet:
    """Exact law of the transformed pair, identical outcomes merged."""
    _check_pair(z.x, z.y)
    X, Y = outcome_arrays(z.x.array, z.y.array, _resolve(t, z))
    w = 1.0 / len(X)
    merged: dict[tuple, float] = defaultdict(float)
    for xr, yr in zip(X.tolist(), Y.tolist()):
        merged[(tuple(xr), tuple(yr))] += w
    alpha = z.x.alphabet
    items = tuple((SequencePair(Sequence(alpha, xr), Sequence(alpha, yr)), p) for (xr, yr), p in merged.items())
    return OutcomeSet(items)


def preimages(zt: SequencePair, t: Transform) -> list[SequencePair]:
    """Every pair ``z`` that the transformation can map to ``zt``."""
    _check_pair(zt.x, zt.y)
    alpha = zt.x.alphabet
    t = _resolve(t, zt)
    x, y = zt.x.array, zt.y.array
    out = []
    if isinstance(t, LetterSwap):
        n = len(x)
        for p in np.flatnonzero(np.concatenate([x, y]) == t.b).tolist():
            xa, ya = x.copy(), y.copy()
            if p < n:
                xa[p] = t.a
            else:
                ya[p - n] = t.a
            out.append(_pair(alpha, xa, ya))
        return out
    l = t.l
    try:
        block_stats_array(x, l)
    except Exception:
        return []
    runs = run_lengths(x)
    central = np.flatnonzero(runs[:-1] == l)
    for i in central.tolist():
        for j in central.tolist():
            if i == j:
                continue
            lengths = runs.copy()
            lengths[i] -= 1
            lengths[j] += 1
            xa = np.repeat((x[0] + np.arange(len(lengths))) % 2, lengths)
            out.append(_pair(alpha, xa, y))
    return out


def expected_gain(z: SequencePair, t: Transform, scheme: ScoringScheme) -> float:
    """Exact ``E[L(Z~) - L(Z) | Z = z]`` over all outcomes."""
    _check_pair(z.x, z.y, scheme)
    _, gains = outcome_gains(z.x.array, z.y.array, _resolve(t, z), scheme)
    return float(np.mean(gains))
