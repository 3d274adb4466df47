"""Sequence models and the statistics that drive their score fluctuations.

Two models are supported:

* ``IIDModel``: both strings i.i.d. over a finite alphabet. The driving pair is
  ``U = N_b`` and ``V = N_a + N_b`` counted over both strings.
* ``BlockModel``: binary strings built from alternating-colour blocks whose
  lengths are i.i.d. on ``{l-1, l, l+1}`` with probabilities ``(q1, q2, q3)``,
  truncated to ``n`` symbols. The last run is not a block. The driving
  statistics are ``T`` (block count), ``U = B_l - B_{l-1} - B_{l+1}`` and the
  trailing-run length ``R``, all computed from ``x`` alone; ``V = (T, R)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import BINARY, Alphabet, Sequence, SequencePair, SymbolDist
from .errors import InfeasibleTripleError, MalformedSequenceError, ValidationError
from .rng import RandomStream

LOG_SPACE_MIN_N = 100


# -- block model parameters and statistics ----------------------------------

@dataclass(frozen=True)
class BlockModelParams:
    l: int
    q1: float
    q2: float
    q3: float

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 2:
            raise ValidationError(f"central block length must be an integer >= 2, got {self.l}", key="l")
        object.__setattr__(self, "l", int(self.l))
        for name in ("q1", "q2", "q3"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not 0.0 < v < 1.0:
                raise ValidationError(f"{name}={v} must lie in (0, 1)", key=name)
        total = self.q1 + self.q2 + self.q3
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"q1+q2+q3={total!r} must equal 1 (q3 should be {1 - self.q1 - self.q2!r})",
                                  key="q3")

    @classmethod
    def uniform(cls, l: int) -> "BlockModelParams":
        return cls(l, 1 / 3, 1 / 3, 1 / 3)

    @property
    def q(self) -> tuple[float, float, float]:
        return (self.q1, self.q2, self.q3)

    @property
    def mu(self) -> float:
        """Mean block length ``l + q3 - q1``."""
        return self.l + self.q3 - self.q1

    @property
    def lengths(self) -> tuple[int, int, int]:
        return (self.l - 1, self.l, self.l + 1)

    def tail(self, r: int) -> float:
        """``P(W >= r)`` for a block length ``W``; zero outside ``1..l+1``."""
        if r < 1 or r > self.l + 1:
            return 0.0
        if r <= self.l - 1:
            return 1.0
        if r == self.l:
            return self.q2 + self.q3
        return self.q3


@dataclass(frozen=True)
class BlockStats:
    """Counts of blocks of length ``l-1``, ``l``, ``l+1`` and the trailing-run length."""

    b1: int
    b2: int
    b3: int
    r: int

    def __post_init__(self):
        if min(self.b1, self.b2, self.b3) < 0:
            raise ValidationError(f"negative block count in {self}")

    def length(self, l: int) -> int:
        return (l - 1) * self.b1 + l * self.b2 + (l + 1) * self.b3 + self.r


@dataclass(frozen=True)
class UVStats:
    """Driving statistics.

    For the block model ``v`` is the pair ``(t, r)``; for the i.i.d. model it is
    the integer ``N_a + N_b``.
    """

    u: int
    v: int | tuple[int, int]


# -- models -----------------------------------------------------------------------

@dataclass(frozen=True)
class IIDModel:
    dist: SymbolDist
    a: int
    b: int

    name = "iid"
    k0 = 1

    def __post_init__(self):
        ia, ib = self.dist.alphabet.index(self.a), self.dist.alphabet.index(self.b)
        if ia == ib:
            raise ValidationError("swap letters a and b must differ", key="swap")
        object.__setattr__(self, "a", ia)
        object.__setattr__(self, "b", ib)

    @property
    def alphabet(self) -> Alphabet:
        return self.dist.alphabet

    @property
    def p(self) -> float:
        return self.dist.p[self.a] + self.dist.p[self.b]

    @property
    def p_b(self) -> float:
        return self.dist.p[self.b] / self.p

    def transform(self):
        from .transforms import LetterSwap

        return LetterSwap(self.a, self.b)

    def sample_array(self, n: int, rng: RandomStream) -> np.ndarray:
        cum = np.cumsum(self.dist.array)[:-1]
        return np.searchsorted(cum, rng.random(n), side="right").astype(np.int64)

    def sample_arrays(self, n: int, rng: RandomStream) -> tuple[np.ndarray, np.ndarray]:
        return self.sample_array(n, rng), self.sample_array(n, rng)

    def uv_arrays(self, x: np.ndarray, y: np.ndarray) -> tuple[int, int]:
        nb = int(np.count_nonzero(x == self.b) + np.count_nonzero(y == self.b))
        na = int(np.count_nonzero(x == self.a) + np.count_nonzero(y == self.a))
        return nb, na + nb

    def sample_uv(self, n: int, rng: RandomStream) -> tuple[int, int]:
        return self.uv_arrays(*self.sample_arrays(n, rng))

    def describe(self) -> dict:
        return {
            "model": "iid",
            "alphabet": list(self.alphabet.symbols),
            "probs": list(self.dist.p),
            "swap": [self.alphabet.symbols[self.a], self.alphabet.symbols[self.b]],
        }


@dataclass(frozen=True)
class BlockModel:
    params: BlockModelParams

    name = "block"
    k0 = 4

    @property
    def alphabet(self) -> Alphabet:
        return BINARY

    @property
    def l(self) -> int:
        return self.params.l

    def transform(self):
        from .transforms import BlockTransform

        return BlockTransform(self.params.l)

    def sample_lengths(self, n: int, rng: RandomStream) -> tuple[int, np.ndarray]:
        """First colour and enough i.i.d. block lengths to cover ``n`` symbols."""
        l = self.params.l
        color = int(rng.integers(2))
        m = n // (l - 1) + 1
        cum = np.array([self.params.q1, self.params.q1 + self.params.q2])
        lengths = (l - 1) + np.searchsorted(cum, rng.random(m), side="right")
        return color, lengths.astype(np.int64)

    def sample_array(self, n: int, rng: RandomStream) -> np.ndarray:
        color, lengths = self.sample_lengths(n, rng)
        return build_block_array(lengths, color, n)

    def sample_arrays(self, n: int, rng: RandomStream) -> tuple[np.ndarray, np.ndarray]:
        return self.sample_array(n, rng), self.sample_array(n, rng)

    def uv_arrays(self, x: np.ndarray, y: np.ndarray | None = None) -> tuple[int, tuple[int, int]]:
        s = block_stats_array(x, self.params.l)
        return _tur(s)

    def sample_uv(self, n: int, rng: RandomStream) -> tuple[int, tuple[int, int]]:
        """Statistics of ``x`` straight from the block lengths (``y`` plays no role)."""
        _, lengths = self.sample_lengths(n, rng)
        s = stats_from_lengths(lengths, n, self.params.l)
        return _tur(s)

    def describe(self) -> dict:
        p = self.params
        return {"model": "block", "l": p.l, "q1": p.q1, "q2": p.q2, "q3": p.q3}


Model = IIDModel | BlockModel


def model_from_config(cfg: dict) -> Model:
    """Build a model from a config mapping (see README for key names)."""
    kind = cfg.get("model")
    if kind == "block":
        for key in ("l", "q1", "q2", "q3"):
            if key not in cfg and not (key != "l" and "q" in cfg):
                raise ValidationError("missing key", key=f"model.{key}")
        if "q" in cfg:
            q1, q2, q3 = cfg["q"]
        else:
            q1, q2, q3 = cfg["q1"], cfg["q2"], cfg["q3"]
        try:
            return BlockModel(BlockModelParams(cfg["l"], q1, q2, q3))
        except ValidationError as exc:
            exc.key = f"model.{exc.key}" if exc.key else "model"
            raise
    if kind == "iid":
        from .core import dist_from_config

        try:
            dist = dist_from_config(cfg)
            swap = cfg.get("swap", list(dist.alphabet.symbols[:2]))
            return IIDModel(dist, swap[0], swap[1])
        except ValidationError as exc:
            exc.key = f"model.{exc.key}" if exc.key else "model"
            raise
    raise ValidationError(f"unknown model {kind!r}; expected 'iid' or 'block'", key="model.model")


# -- sampling ---------------------------------------------------------------------

def sample_iid(n: int, dist: SymbolDist, rng: RandomStream) -> Sequence:
    if n < 0:
        raise ValidationError("n must be >= 0")
    cum = np.cumsum(dist.array)[:-1]
    data = np.searchsorted(cum, rng.random(n), side="right")
    return Sequence.from_array(dist.alphabet, data)


def build_block_array(lengths, first_color: int, n: int) -> np.ndarray:
    """Concatenate alternating-colour runs of the given lengths and cut at ``n``."""
    lengths = np.asarray(lengths, dtype=np.int64)
    colors = (first_color + np.arange(len(lengths))) % 2
    out = np.repeat(colors, lengths)
    if len(out) < n:
        raise ValidationError(f"block lengths cover only {len(out)} < n={n} symbols")
    return out[:n].astype(np.int64)


def build_block_sequence(lengths, first_color: int, n: int) -> Sequence:
    return Sequence.from_array(BINARY, build_block_array(lengths, first_color, n))


def sample_block(n: int, params: BlockModelParams, rng: RandomStream) -> Sequence:
    if n < 1:
        raise ValidationError("n must be >= 1 for the block model")
    return Sequence.from_array(BINARY, BlockModel(params).sample_array(n, rng))


# -- block statistics ---------------------------------------------------------------

def run_lengths(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if len(x) == 0:
        return np.zeros(0, dtype=np.int64)
    cuts = np.flatnonzero(np.diff(x)) + 1
    bounds = np.concatenate(([0], cuts, [len(x)]))
    return np.diff(bounds)


def block_stats_array(x: np.ndarray, l: int) -> BlockStats:
    runs = run_lengths(x)
    if len(runs) == 0:
        raise MalformedSequenceError("empty sequence has no trailing run")
    if np.any((x != 0) & (x != 1)):
        raise MalformedSequenceError("block-model sequences are binary")
    blocks, r = runs[:-1], int(runs[-1])
    bad = blocks[(blocks < l - 1) | (blocks > l + 1)]
    if len(bad):
        raise MalformedSequenceError(f"block of length {int(bad[0])} outside {{{l - 1}, {l}, {l + 1}}}")
    if r > l + 1:
        raise MalformedSequenceError(f"trailing run of length {r} exceeds l+1={l + 1}")
    return BlockStats(int(np.count_nonzero(blocks == l - 1)), int(np.count_nonzero(blocks == l)),
                      int(np.count_nonzero(blocks == l + 1)), r)


def block_stats(x: Sequence, l: int) -> BlockStats:
    if len(x.alphabet) != 2:
        raise MalformedSequenceError("block-model sequences are binary")
    return block_stats_array(x.array, l)


def stats_from_lengths(lengths: np.ndarray, n: int, l: int) -> BlockStats:
    """Block counts of the length-``n`` truncation of a run-length sequence."""
    ends = np.cumsum(lengths)
    t = int(np.searchsorted(ends, n, side="left"))  # blocks ending strictly before n
    full = lengths[:t]
    r = n - (int(ends[t - 1]) if t else 0)
    return BlockStats(int(np.count_nonzero(full == l - 1)), int(np.count_nonzero(full == l)),
                      int(np.count_nonzero(full == l + 1)), r)


def _tur(s: BlockStats) -> tuple[int, tuple[int, int]]:
    return s.b2 - s.b1 - s.b3, (s.b1 + s.b2 + s.b3, s.r)


def uv_from_blocks(stats: BlockStats, n: int, l: int) -> UVStats:
    """``t = b1+b2+b3``, ``u = b2-b1-b3``; ``v = (t, r)``."""
    if stats.length(l) != n:
        raise ValidationError(f"block counts {stats} cover {stats.length(l)} symbols, not n={n}")
    if not 1 <= stats.r <= l + 1:
        raise ValidationError(f"trailing run {stats.r} outside 1..{l + 1}")
    u, v = _tur(stats)
    return UVStats(u, v)


def tur_to_blocks(t: int, u: int, r: int, n: int, l: int) -> BlockStats:
    """Invert ``(t, u, r) -> (b1, b2, b3)`` exactly in integers.

    ``4*b1 = (2l+1)t - u - 2(n-r)``, ``2*b2 = t + u``,
    ``4*b3 = -(2l-1)t - u + 2(n-r)``.
    """
    if not 1 <= r <= l + 1:
        raise InfeasibleTripleError(f"trailing run {r} outside 1..{l + 1}")
    num1 = (2 * l + 1) * t - u - 2 * (n - r)
    num2 = t + u
    num3 = -(2 * l - 1) * t - u + 2 * (n - r)
    if num1 % 4 or num2 % 2 or num3 % 4:
        raise InfeasibleTripleError(f"(t,u,r)=({t},{u},{r}) gives non-integer block counts")
    b1, b2, b3 = num1 // 4, num2 // 2, num3 // 4
    if min(b1, b2, b3) < 0:
        raise InfeasibleTripleError(f"(t,u,r)=({t},{u},{r}) gives negative block counts ({b1},{b2},{b3})")
    return BlockStats(b1, b2, b3, r)


def is_feasible(t: int, u: int, r: int, n: int, l: int) -> bool:
    try:
        tur_to_blocks(t, u, r, n, l)
    except InfeasibleTripleError:
        return False
    return True


# -- closed-form probabilities -------------------------------------------------------

def log_multinomial(counts) -> float:
    counts = [int(c) for c in counts]
    return math.lgamma(sum(counts) + 1) - sum(math.lgamma(c + 1) for c in counts)


def multinomial_coef(counts) -> int:
    total, out = 0, 1
    for c in counts:
        total += c
        out *= math.comb(total, c)
    return out


def block_seq_prob(x: Sequence, params: BlockModelParams, n: int | None = None) -> float:
    """``P(X = x) = 1/2 * q1^b1 q2^b2 q3^b3 * P(W >= r)``."""
    if n is not None and len(x) != n:
        raise ValidationError(f"sequence length {len(x)} differs from n={n}")
    s = block_stats(x, params.l)
    return _counts_prob(s, params, len(x), coef=None) / 2


def _counts_prob(s: BlockStats, params: BlockModelParams, n: int, coef) -> float:
    tail = params.tail(s.r)
    if tail == 0.0:
        return 0.0
    if n > LOG_SPACE_MIN_N:
        logp = (s.b1 * math.log(params.q1) + s.b2 * math.log(params.q2)
                + s.b3 * math.log(params.q3) + math.log(tail))
        if coef is not None:
            logp += log_multinomial((s.b1, s.b2, s.b3))
        return math.exp(logp)
    p = params.q1 ** s.b1 * params.q2 ** s.b2 * params.q3 ** s.b3 * tail
    if coef is not None:
        p *= multinomial_coef((s.b1, s.b2, s.b3))
    return p


def block_counts_pmf(stats: BlockStats, params: BlockModelParams, n: int) -> float:
    """``P(B_{l-1}=b1, B_l=b2, B_{l+1}=b3)`` (the trailing run is then determined)."""
    if stats.length(params.l) != n:
        return 0.0
    return _counts_prob(stats, params, n, coef=True)


def tur_pmf(t: int, u: int, r: int, params: BlockModelParams, n: int) -> float:
    """Joint pmf of ``(T, U, R)``; zero for infeasible triples."""
    try:
        s = tur_to_blocks(t, u, r, n, params.l)
    except InfeasibleTripleError:
        return 0.0
    return _counts_prob(s, params, n, coef=True)


def log_tur_pmf_grid(t, u, r, params: BlockModelParams, n: int) -> np.ndarray:
    """Vectorised log of :func:`tur_pmf` over broadcastable integer arrays.

    Infeasible entries are ``-inf``.
    """
    from scipy.special import gammaln

    l = params.l
    t, u, r = np.broadcast_arrays(np.asarray(t, np.int64), np.asarray(u, np.int64), np.asarray(r, np.int64))
    num1 = (2 * l + 1) * t - u - 2 * (n - r)
    num2 = t + u
    num3 = -(2 * l - 1) * t - u + 2 * (n - r)
    ok = (num1 % 4 == 0) & (num2 % 2 == 0) & (num3 % 4 == 0) & (r >= 1) & (r <= l + 1)
    b1, b2, b3 = num1 // 4, num2 // 2, num3 // 4
    ok &= (b1 >= 0) & (b2 >= 0) & (b3 >= 0)
    tails = np.array([0.0] + [params.tail(k) for k in range(1, l + 2)])
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = (gammaln(t + 1.0) - gammaln(b1 + 1.0) - gammaln(b2 + 1.0) - gammaln(b3 + 1.0)
                + b1 * math.log(params.q1) + b2 * math.log(params.q2) + b3 * math.log(params.q3)
                + np.log(tails[np.clip(r, 0, l + 1)]))
    return np.where(ok, logp, -np.inf)


def iid_uv(z: SequencePair, a: int | str, b: int | str) -> UVStats:
    alphabet = z.x.alphabet
    ia, ib = alphabet.index(a), alphabet.index(b)
    if ia == ib:
        raise ValidationError("a and b must differ")
    nb = z.x.count(ib) + z.y.count(ib)
    na = z.x.count(ia) + z.y.count(ia)
    return UVStats(nb, na + nb)


def uv_of(model: Model, z: SequencePair) -> UVStats:
    if isinstance(model, BlockModel):
        return uv_from_blocks(block_stats(z.x, model.l), len(z.x), model.l)
    return iid_uv(z, model.a, model.b)


def pack_v(model: Model, v) -> int:
    """Encode ``v`` as one integer; block-model ``(t, r)`` becomes ``t*(l+2) + r``."""
    if isinstance(model, BlockModel):
        t, r = v
        return int(t) * (model.l + 2) + int(r)
    return int(v)


def unpack_v(model: Model, code: int):
    if isinstance(model, BlockModel):
        w = model.l + 2
        return (int(code) // w, int(code) % w)
    return int(code)


# -- typical sets -------------------------------------------------------------------

@dataclass(frozen=True)
class TypicalSets:
    """Central windows for ``U`` and ``V``.

    i.i.d.: ``V`` in ``[2np - c*sqrt(2n), 2np + c*sqrt(2n)]`` and, given ``v``,
    ``U`` in ``[v*p_b - c*sqrt(v), v*p_b + c*sqrt(v)]`` (``c = 1`` gives the
    standard windows). Block model: ``U`` in ``n/mu*(q2-q1-q3) +- c*sqrt(n)``
    and ``T`` in ``n/mu +- c*sqrt(n)`` with ``r`` unrestricted.
    """

    model: str
    n: int
    c: float
    v_window: tuple[float, float]  # for the block model: the T window
    u_center: float  # i.i.d.: p_b (slope in v); block: fixed centre
    u_halfwidth: float  # i.i.d.: multiplier of sqrt(v); block: absolute

    def u_window(self, v) -> tuple[float, float]:
        if self.model == "iid":
            h = self.u_halfwidth * math.sqrt(v)
            return (v * self.u_center - h, v * self.u_center + h)
        return (self.u_center - self.u_halfwidth, self.u_center + self.u_halfwidth)

    def v_contains(self, v) -> bool:
        t = v[0] if isinstance(v, tuple) else v
        return self.v_window[0] <= t <= self.v_window[1]

    def contains(self, u, v) -> bool:
        if not self.v_contains(v):
            return False
        lo, hi = self.u_window(v)
        return lo <= u <= hi

    def v_values(self) -> Iterator:
        """Integer ``v`` (i.i.d.) or ``t`` (block) values inside the V/T window."""
        lo, hi = math.ceil(self.v_window[0]), math.floor(self.v_window[1])
        return iter(range(max(lo, 0), hi + 1))


def typical_sets(model: Model, n: int, c: float = 1.0) -> TypicalSets:
    if c < 0:
        raise ValidationError("c must be >= 0")
    if isinstance(model, BlockModel):
        p = model.params
        ucen = n / p.mu * (p.q2 - p.q1 - p.q3)
        h = c * math.sqrt(n)
        return TypicalSets("block", n, c, (n / p.mu - h, n / p.mu + h), ucen, h)
    h = c * math.sqrt(2 * n)
    return TypicalSets("iid", n, c, (2 * n * model.p - h, 2 * n * model.p + h), model.p_b, c)
