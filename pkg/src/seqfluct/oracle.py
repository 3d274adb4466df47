"""Exact small-``n`` enumeration of the sequence models.

Pairs ``z = (x, y)`` are identified by an integer code: the base-``k`` number
``x_1 … x_n y_1 … y_n`` (most significant digit first). A :class:`DiscreteLaw`
is a sorted array of such codes (or of plain integers for scalar laws) with
matching probabilities, so total variation and restriction are array
operations and merged duplicates compare exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .align import score_batch
from .core import ScoringScheme, Sequence, SequencePair
from .errors import ResourceGuardError, TransformInapplicableError, ValidationError
from .genmodels import (BlockModel, BlockModelParams, IIDModel, log_multinomial, multinomial_coef,
                        pack_v, run_lengths, tur_to_blocks, is_feasible, typical_sets, tur_pmf, unpack_v)
from .transforms import BlockTransform, LetterSwap, Transform, block_outcome_arrays

MAX_PAIRS = 10 ** 7
PROB_SUM_TOL = 1e-10


# -- laws ------------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteLaw:
    support: np.ndarray  # sorted, distinct int64 codes
    probs: np.ndarray
    n: int | None = None  # sequence length when the support encodes pairs
    k: int | None = None  # alphabet size when the support encodes pairs

    def __post_init__(self):
        if len(self.support) != len(self.probs):
            raise ValidationError("support and probabilities differ in length")
        if np.any(self.probs < 0):
            raise ValidationError("negative probability")
        if len(self.support) and abs(float(self.probs.sum()) - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"probabilities sum to {float(self.probs.sum())!r}")
        if len(self.support) > 1 and np.any(np.diff(self.support) <= 0):
            raise ValidationError("support must be sorted and distinct")

    @classmethod
    def from_codes(cls, codes, probs, n=None, k=None, normalize=False) -> "DiscreteLaw":
        """Aggregate (possibly repeated) codes into a law."""
        codes = np.asarray(codes, dtype=np.int64)
        probs = np.asarray(probs, dtype=float)
        uniq, inv = np.unique(codes, return_inverse=True)
        agg = np.zeros(len(uniq))
        np.add.at(agg, inv, probs)
        if normalize:
            agg = agg / agg.sum()
        return cls(uniq, agg, n, k)

    def __len__(self) -> int:
        return len(self.support)

    def prob(self, code: int) -> float:
        i = np.searchsorted(self.support, code)
        if i < len(self.support) and self.support[i] == code:
            return float(self.probs[i])
        return 0.0

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot((self.support - m) ** 2, self.probs))

    def pairs(self) -> list[SequencePair]:
        """Decode the support into sequence pairs (needs ``n`` and ``k``)."""
        if self.n is None or self.k is None:
            raise ValidationError("law does not encode sequence pairs")
        digits = decode_codes(self.support, 2 * self.n, self.k)
        from .core import Alphabet

        alpha = Alphabet(tuple(str(i) for i in range(self.k)))
        return [SequencePair(Sequence(alpha, tuple(r[: self.n])), Sequence(alpha, tuple(r[self.n:])))
                for r in digits.tolist()]


def encode_rows(rows: np.ndarray, k: int) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    w = k ** np.arange(rows.shape[1] - 1, -1, -1, dtype=np.int64)
    return rows @ w


def decode_codes(codes: np.ndarray, length: int, k: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    w = k ** np.arange(length - 1, -1, -1, dtype=np.int64)
    return (codes[:, None] // w[None, :]) % k


def tv_distance(p: DiscreteLaw, q: DiscreteLaw) -> float:
    """``1/2 * sum |p - q|`` over the union of the supports."""
    support = np.union1d(p.support, q.support)
    pa = np.zeros(len(support))
    qa = np.zeros(len(support))
    pa[np.searchsorted(support, p.support)] = p.probs
    qa[np.searchsorted(support, q.support)] = q.probs
    return 0.5 * float(np.abs(pa - qa).sum())


# -- model enumeration -----------------------------------------------------------------

def block_sequence_count(l: int, n: int) -> int:
    """Number of length-``n`` strings the block model can produce."""
    # ways[s]: ordered block lists summing to s
    ways = [0] * (n + 1)
    ways[0] = 1
    for s in range(1, n + 1):
        ways[s] = sum(ways[s - w] for w in (l - 1, l, l + 1) if s - w >= 0)
    return 2 * sum(ways[n - r] for r in range(1, min(l + 1, n) + 1))


def block_sequences(params: BlockModelParams, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Every length-``n`` block-model string with its probability, as ``(rows, probs)``.

    A string is a first colour, a list of block lengths and a trailing run
    ``r = n - sum`` with ``1 <= r <= l+1``; its probability is
    ``1/2 * prod q(w) * P(W >= r)``.
    """
    l = params.l
    count = block_sequence_count(l, n)
    if count > MAX_PAIRS:
        raise ResourceGuardError(f"{count} block-model strings of length {n} exceed the enumeration guard")
    qmap = {l - 1: params.q1, l: params.q2, l + 1: params.q3}
    found: list[tuple[tuple[int, ...], float]] = []

    def grow(lengths: list[int], total: int, p: float):
        r = n - total
        if 1 <= r <= l + 1:
            found.append((tuple(lengths) + (r,), p * params.tail(r)))
        for w in (l - 1, l, l + 1):
            if total + w < n:
                lengths.append(w)
                grow(lengths, total + w, p * qmap[w])
                lengths.pop()

    grow([], 0, 1.0)
    rows, probs = [], []
    for color in (0, 1):
        for runs, p in found:
            rows.append(np.repeat((color + np.arange(len(runs))) % 2, runs))
            probs.append(p / 2)
    return np.array(rows, dtype=np.int64).reshape(len(rows), n), np.array(probs)


def single_law(model, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Law of one sequence of the model, as ``(rows, probs)``."""
    if isinstance(model, BlockModel):
        return block_sequences(model.params, n)
    k = len(model.alphabet)
    if k ** n > MAX_PAIRS:
        raise ResourceGuardError(f"{k}^{n} single sequences exceed the enumeration guard")
    rows = np.array(list(product(range(k), repeat=n)), dtype=np.int64).reshape(k ** n, n)
    probs = np.prod(model.dist.array[rows], axis=1) if n else np.ones(1)
    return rows, probs


@dataclass(frozen=True)
class PairSpace:
    """The enumerated pair space with per-pair ``(u, v)`` statistics."""

    n: int
    k: int
    xrows: np.ndarray
    codes: np.ndarray  # pair codes, x-major
    probs: np.ndarray
    u: np.ndarray
    v: np.ndarray  # i.i.d.: scalar v; block: t * (l + 2) + r (packed (t, r))
    xi: np.ndarray  # index of the x row of each pair
    yi: np.ndarray

    def law(self, mask=None) -> DiscreteLaw:
        if mask is None:
            return DiscreteLaw(self.codes, self.probs, self.n, self.k)
        p = self.probs[mask]
        if p.sum() == 0:
            raise ValidationError("empty fiber")
        return DiscreteLaw(self.codes[mask], p / p.sum(), self.n, self.k)


def pair_space(model, n: int) -> PairSpace:
    k = len(model.alphabet)
    if isinstance(model, IIDModel) and k ** (2 * n) > MAX_PAIRS:
        raise ResourceGuardError(f"|A|^(2n) = {k}^{2 * n} exceeds the enumeration guard {MAX_PAIRS}")
    if isinstance(model, BlockModel) and block_sequence_count(model.l, n) ** 2 > MAX_PAIRS:
        raise ResourceGuardError(f"block-model pairs at n={n} exceed the enumeration guard {MAX_PAIRS}")
    rows, px = single_law(model, n)
    m = len(rows)
    if m * m > MAX_PAIRS:
        raise ResourceGuardError(f"{m}^2 pairs exceed the enumeration guard {MAX_PAIRS}")
    xi = np.repeat(np.arange(m), m)
    yi = np.tile(np.arange(m), m)
    c1 = encode_rows(rows, k)
    codes = c1[xi] * k ** n + c1[yi]
    probs = px[xi] * px[yi]
    if isinstance(model, BlockModel):
        l = model.l
        s = [_row_tur(r, l) for r in rows]
        ux = np.array([a for a, _, _ in s], dtype=np.int64)
        vx = np.array([t * (l + 2) + rr for _, t, rr in s], dtype=np.int64)
        u, v = ux[xi], vx[xi]
    else:
        nb = (rows == model.b).sum(axis=1)
        na = (rows == model.a).sum(axis=1)
        u = nb[xi] + nb[yi]
        v = u + na[xi] + na[yi]
    order = np.argsort(codes)
    return PairSpace(n, k, rows, codes[order], probs[order], u[order], v[order], xi[order], yi[order])


def _row_tur(row: np.ndarray, l: int) -> tuple[int, int, int]:
    runs = run_lengths(row)
    blocks = runs[:-1]
    b1 = int(np.count_nonzero(blocks == l - 1))
    b2 = int(np.count_nonzero(blocks == l))
    b3 = int(np.count_nonzero(blocks == l + 1))
    return b2 - b1 - b3, b1 + b2 + b3, int(runs[-1])


def enumerate_model(model, n: int) -> DiscreteLaw:
    """Every pair with its exact probability."""
    return pair_space(model, n).law()


def conditional_law(model, n: int, u: int, v, space: PairSpace | None = None) -> DiscreteLaw:
    """Restriction of the pair law to ``{U = u, V = v}``, renormalised."""
    space = space or pair_space(model, n)
    mask = (space.u == u) & (space.v == pack_v(model, v))
    if not mask.any():
        raise ValidationError(f"(u, v) = ({u}, {v}) is outside the support")
    return space.law(mask)


def conditional_law_closed(model, n: int, u: int, v, space: PairSpace | None = None) -> DiscreteLaw:
    """The same conditional law from its closed form.

    i.i.d.: ``prod_{c not in {a,b}} (P(c)/(1-p))^{m_c(z)} / multinomial(2n; u, v-u, 2n-v)``.
    Block: ``P(y) / (2 * multinomial(t; b1, b2, b3))``.
    The space is used only to list the candidate pairs.
    """
    space = space or pair_space(model, n)
    mask = (space.u == u) & (space.v == pack_v(model, v))
    if not mask.any():
        raise ValidationError(f"(u, v) = ({u}, {v}) is outside the support")
    codes = space.codes[mask]
    if isinstance(model, BlockModel):
        t, r = v
        b = tur_to_blocks(t, u, r, n, model.l)
        _, py = single_law(model, n)
        probs = py[space.yi[mask]] / (2 * multinomial_coef((b.b1, b.b2, b.b3)))
    else:
        digits = decode_codes(codes, 2 * n, space.k)
        p = model.dist.array
        rest = 1.0 - p[model.a] - p[model.b]
        logw = np.zeros(len(codes))
        for c in range(space.k):
            if c in (model.a, model.b):
                continue
            logw += (digits == c).sum(axis=1) * math.log(p[c] / rest)
        probs = np.exp(logw - log_multinomial((u, v - u, 2 * n - v)))
    return DiscreteLaw(codes, probs, n, space.k)


def pushforward(model, n: int, u: int, v, t: Transform, space: PairSpace | None = None) -> DiscreteLaw:
    """Law of the transformed pair when ``Z ~ P_(u,v)``, by exact outcome enumeration."""
    space = space or pair_space(model, n)
    base = conditional_law(model, n, u, v, space)
    k = space.k
    if isinstance(t, LetterSwap):
        a, b = t.letters(model.alphabet)
        digits = decode_codes(base.support, 2 * n, k)
        hits = digits == a
        counts = hits.sum(axis=1)
        if np.any(counts == 0):
            raise TransformInapplicableError("some pairs in the fiber contain no letter to swap")
        w = k ** np.arange(2 * n - 1, -1, -1, dtype=np.int64)
        rows, cols = np.nonzero(hits)
        new = base.support[rows] + (b - a) * w[cols]
        prob = base.probs[rows] / counts[rows]
        return DiscreteLaw.from_codes(new, prob, n, k)
    shift = k ** n
    xcodes = base.support // shift
    ycodes = base.support % shift
    out_codes, out_probs = [], []
    for xc in np.unique(xcodes):
        x = decode_codes(np.array([xc]), n, k)[0]
        X = block_outcome_arrays(x, t.l)
        xt = encode_rows(X, k)
        sel = xcodes == xc
        out_codes.append((xt[:, None] * shift + ycodes[sel][None, :]).ravel())
        out_probs.append(np.repeat(base.probs[sel][None, :] / len(X), len(X), axis=0).ravel())
    return DiscreteLaw.from_codes(np.concatenate(out_codes), np.concatenate(out_probs), n, k)


def feasible_uv(model, n: int, space: PairSpace | None = None) -> list[tuple[int, object]]:
    """All ``(u, v)`` with positive probability, ``v`` unpacked to ``(t, r)`` for the block model."""
    space = space or pair_space(model, n)
    keys = sorted(set(zip(space.u.tolist(), space.v.tolist())))
    return [(u, unpack_v(model, pv)) for u, pv in keys]


# -- exact moments ---------------------------------------------------------------------

def _scores(space: PairSpace, scheme: ScoringScheme) -> np.ndarray:
    X = space.xrows[space.xi]
    Y = space.xrows[space.yi]
    out = np.empty(len(X))
    step = 200_000
    for s in range(0, len(X), step):
        out[s:s + step] = score_batch(X[s:s + step], Y[s:s + step], scheme)
    return out


def exact_moments(model, n: int, scheme: ScoringScheme) -> tuple[float, float]:
    """``(E L, Var L)`` by full enumeration."""
    space = pair_space(model, n)
    L = _scores(space, scheme)
    mean = float(np.dot(space.probs, L))
    return mean, float(np.dot(space.probs, (L - mean) ** 2))


@dataclass(frozen=True)
class VarianceDecomposition:
    total: float
    mean_within: float  # E Var[L | U, V]
    between: float  # Var E[L | U, V]
    cond_mean: dict  # (u, packed v) -> l(u, v)


def variance_decomposition(model, n: int, scheme: ScoringScheme) -> VarianceDecomposition:
    """Both sides of ``Var L = E Var[L|U,V] + Var E[L|U,V]`` from the enumeration."""
    space = pair_space(model, n)
    L = _scores(space, scheme)
    p = space.probs
    mean = float(np.dot(p, L))
    total = float(np.dot(p, (L - mean) ** 2))
    keys = space.u * (int(space.v.max()) + 1) + space.v
    uniq, inv = np.unique(keys, return_inverse=True)
    pw = np.bincount(inv, weights=p)
    m1 = np.bincount(inv, weights=p * L) / pw
    m2 = np.bincount(inv, weights=p * L * L) / pw
    within = float(np.dot(pw, m2 - m1 ** 2))
    between = float(np.dot(pw, (m1 - mean) ** 2))
    span = int(space.v.max()) + 1
    cond = {(int(kk // span), int(kk % span)): float(val) for kk, val in zip(uniq, m1)}
    return VarianceDecomposition(total, within, between, cond)


def conditional_means(model, n: int, scheme: ScoringScheme) -> dict:
    """Exact ``l(u, v) = E[L | U=u, V=v]`` keyed by ``(u, v)`` (``v = (t, r)`` for blocks)."""
    dec = variance_decomposition(model, n, scheme)
    return {(u, unpack_v(model, pv)): m for (u, pv), m in dec.cond_mean.items()}


# -- fibers ----------------------------------------------------------------------------

def fiber(model, n: int, v) -> list[int]:
    """Sorted ``u`` values with ``P(U=u, V=v) > 0``; empty for infeasible ``v``."""
    if isinstance(model, BlockModel):
        t, r = v
        return [u for u in range(-t, t + 1) if is_feasible(t, u, r, n, model.l)]
    k = len(model.alphabet)
    if not 0 <= v <= 2 * n or (k == 2 and v != 2 * n):
        return []
    return list(range(v + 1))


# -- variance of monotone functions ----------------------------------------------------

def monotone_variance_bound(support, probs, f_values) -> tuple[float, float]:
    """``(Var f(N), (delta / k0)^2 * Var N)`` for ``N`` on a sorted integer support.

    ``delta`` is the smallest absolute increment of ``f`` between consecutive
    support points and ``k0`` the largest gap between them (``k0 = 1`` on an
    interval). ``f`` must be strictly monotone on the support.
    """
    z = np.asarray(support, dtype=float)
    p = np.asarray(probs, dtype=float)
    f = np.asarray(f_values, dtype=float)
    if len(z) != len(p) or len(z) != len(f):
        raise ValidationError("support, probabilities and values differ in length")
    if len(z) > 1 and np.any(np.diff(z) <= 0):
        raise ValidationError("support must be strictly increasing")
    df = np.diff(f)
    if len(df) and not (np.all(df > 0) or np.all(df < 0)):
        raise ValidationError("f must be strictly monotone on the support")
    p = p / p.sum()

    def var(a):
        m = np.dot(p, a)
        return float(np.dot(p, (a - m) ** 2))

    if len(z) < 2:
        return var(f), 0.0
    delta = float(np.min(np.abs(df)))
    k0 = float(np.max(np.diff(z)))
    return var(f), (delta / k0) ** 2 * var(z)


# -- local limit diagnostics ----------------------------------------------------------

def _window(center: float, half: float) -> np.ndarray:
    return np.arange(math.ceil(center - half), math.floor(center + half) + 1)


def binomial_lclt_floor(m: int, p: float, beta: float) -> float:
    """``min sqrt(m) * P(X = i)`` over ``i`` in ``[mp - beta sqrt(m), mp + beta sqrt(m)]``."""
    from scipy.stats import binom

    i = _window(m * p, beta * math.sqrt(m))
    i = i[(i >= 0) & (i <= m)]
    return float(math.sqrt(m) * binom.pmf(i, m, p).min())


def truncated_binomial_variance(m: int, p: float, lo: float, hi: float) -> float:
    """``Var[X | lo <= X <= hi]`` for ``X ~ Binomial(m, p)``; zero for a single-point window."""
    from scipy.stats import binom

    i = np.arange(max(0, math.ceil(lo)), min(m, math.floor(hi)) + 1)
    if len(i) == 0:
        return 0.0
    w = binom.pmf(i, m, p)
    if w.sum() == 0:
        return 0.0
    w = w / w.sum()
    mu = np.dot(w, i)
    return float(np.dot(w, (i - mu) ** 2))


def multinomial_lclt_floor(m: int, p1: float, p2: float, beta: float) -> float:
    """``min m * P(X=i, Y=j)`` over the ``beta sqrt(m)`` box around ``(m p1, m p2)``.

    ``(X, Y, m-X-Y)`` is multinomial with probabilities ``(p1, p2, 1-p1-p2)``.
    """
    from scipy.special import gammaln

    p3 = 1.0 - p1 - p2
    i = _window(m * p1, beta * math.sqrt(m))[:, None]
    j = _window(m * p2, beta * math.sqrt(m))[None, :]
    rest = m - i - j
    ok = (i >= 0) & (j >= 0) & (rest >= 0)
    with np.errstate(invalid="ignore"):
        logp = (gammaln(m + 1) - gammaln(i + 1) - gammaln(j + 1) - gammaln(rest + 1)
                + i * math.log(p1) + j * math.log(p2) + rest * math.log(p3))
    return float(m * np.exp(logp[ok]).min())


# -- the ratio of neighbouring fiber probabilities -------------------------------------

def quotient_closed_form(t: int, u: int, r: int, params: BlockModelParams, n: int) -> float:
    """``[b1 b3 / ((b2+1)(b2+2))] * q2^2 / (q1 q3)`` at the counts of ``(t, u, r)``."""
    b = tur_to_blocks(t, u, r, n, params.l)
    return b.b1 * b.b3 / ((b.b2 + 1) * (b.b2 + 2)) * params.q2 ** 2 / (params.q1 * params.q3)


def quotient_exact(t: int, u: int, r: int, params: BlockModelParams, n: int) -> float:
    """``P(T=t, U=u+4, R=r) / P(T=t, U=u, R=r)`` from exact integer multinomials."""
    b = tur_to_blocks(t, u, r, n, params.l)
    c = tur_to_blocks(t, u + 4, r, n, params.l)
    num = multinomial_coef((c.b1, c.b2, c.b3))
    den = multinomial_coef((b.b1, b.b2, b.b3))
    from fractions import Fraction

    coef = Fraction(num, den)
    return float(coef) * params.q2 ** 2 / (params.q1 * params.q3)


def quotient_window_K(params: BlockModelParams, n: int, c: float = 1.0) -> float:
    """Smallest ``K`` with ``|ratio - 1| <= K / sqrt(n)`` over all typical-set fiber neighbours."""
    model = BlockModel(params)
    ts = typical_sets(model, n, c)
    lo, hi = ts.u_window(None)
    worst = 0.0
    for t in ts.v_values():
        for r in range(1, params.l + 2):
            us = [u for u in fiber(model, n, (t, r)) if lo <= u and u + 4 <= hi]
            for u in us:
                ratio = quotient_closed_form(t, u, r, params, n)
                worst = max(worst, abs(ratio - 1.0))
    return worst * math.sqrt(n)


def tur_pmf_check(params: BlockModelParams, n: int) -> float:
    """Total mass of :func:`tur_pmf` over every triple; should be 1."""
    l = params.l
    total = 0.0
    for t in range(0, n // (l - 1) + 1):
        for r in range(1, l + 2):
            for u in range(-t, t + 1):
                total += tur_pmf(t, u, r, params, n)
    return total
