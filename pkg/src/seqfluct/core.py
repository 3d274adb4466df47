"""Alphabets, sequences, scoring schemes and symbol distributions.

Symbols are stored as dense integer indices into an :class:`Alphabet`; the
alphabet owns the printable names. Every type here is immutable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, NamedTuple

import numpy as np

from .errors import DimensionError, ValidationError

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        syms = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", syms)
        if len(syms) < 2:
            raise ValidationError("alphabet needs at least two symbols", key="alphabet")
        if len(set(syms)) != len(syms):
            raise ValidationError(f"duplicate symbols in alphabet {syms}", key="alphabet")

    @classmethod
    def of(cls, symbols: Iterable[Any]) -> "Alphabet":
        if isinstance(symbols, str):
            symbols = list(symbols)
        return cls(tuple(symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    @cached_property
    def _lookup(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def index(self, symbol: int | str) -> int:
        """Resolve a symbol name (``str``) or an index (``int``) to an index."""
        if isinstance(symbol, (int, np.integer)) and not isinstance(symbol, bool):
            if not 0 <= symbol < len(self.symbols):
                raise ValidationError(f"symbol index {symbol} out of range")
            return int(symbol)
        try:
            return self._lookup[str(symbol)]
        except KeyError:
            raise ValidationError(f"unknown symbol {symbol!r} for alphabet {self.symbols}") from None

    def encode(self, text: str) -> tuple[int, ...]:
        return tuple(self.index(ch) for ch in text)

    def decode(self, data: Iterable[int]) -> str:
        return "".join(self.symbols[i] for i in data)


BINARY = Alphabet(("0", "1"))


@dataclass(frozen=True)
class Sequence:
    alphabet: Alphabet
    data: tuple[int, ...]

    def __post_init__(self):
        data = tuple(int(v) for v in self.data)
        object.__setattr__(self, "data", data)
        k = len(self.alphabet)
        if any(v < 0 or v >= k for v in data):
            raise ValidationError("sequence contains an index outside the alphabet")

    @classmethod
    def from_string(cls, alphabet: Alphabet, text: str) -> "Sequence":
        return cls(alphabet, alphabet.encode(text))

    @classmethod
    def from_array(cls, alphabet: Alphabet, arr) -> "Sequence":
        return cls(alphabet, tuple(np.asarray(arr).tolist()))

    def __len__(self) -> int:
        return len(self.data)

    def __str__(self) -> str:
        return self.alphabet.decode(self.data)

    @property
    def array(self) -> np.ndarray:
        return np.fromiter(self.data, dtype=np.int64, count=len(self.data))

    def count(self, symbol: int) -> int:
        return self.data.count(symbol)


class SequencePair(NamedTuple):
    """The pair ``Z = (X, Y)``."""

    x: Sequence
    y: Sequence

    def __str__(self) -> str:
        return f"({self.x}, {self.y})"


def make_pair(alphabet: Alphabet, x: str, y: str) -> SequencePair:
    return SequencePair(Sequence.from_string(alphabet, x), Sequence.from_string(alphabet, y))


@dataclass(frozen=True)
class ScoringScheme:
    """Pairwise score table ``S`` (nonnegative) plus gap price ``delta``.

    An alignment with ``k`` aligned pairs scores the sum of ``S`` over the
    aligned pairs plus ``delta * (n - k)``. ``delta`` may be positive but may
    not exceed the largest table entry.
    """

    alphabet: Alphabet
    table: tuple[tuple[float, ...], ...]
    delta: float = 0.0

    def __post_init__(self):
        k = len(self.alphabet)
        rows = tuple(tuple(float(v) for v in row) for row in self.table)
        if len(rows) != k or any(len(r) != k for r in rows):
            raise DimensionError(f"score table must be {k}x{k}", key="score_table")
        if any(v < 0 or not np.isfinite(v) for r in rows for v in r):
            raise ValidationError("score table entries must be finite and >= 0", key="score_table")
        object.__setattr__(self, "table", rows)
        object.__setattr__(self, "delta", float(self.delta))
        if not np.isfinite(self.delta):
            raise ValidationError("gap price must be finite", key="gap_price")
        if self.delta > self.a_max:
            raise ValidationError(
                f"gap price {self.delta} exceeds the maximal score {self.a_max}", key="gap_price"
            )

    @property
    def a_max(self) -> float:
        return max(max(r) for r in self.table)

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.array(self.table, dtype=float)
        m.flags.writeable = False
        return m

    @property
    def is_integral(self) -> bool:
        return float(self.delta).is_integer() and all(float(v).is_integer() for r in self.table for v in r)

    @property
    def is_lcs(self) -> bool:
        """True iff this is exactly the 0/1 identity table with zero gap price."""
        k = len(self.alphabet)
        return self.delta == 0.0 and all(
            self.table[i][j] == (1.0 if i == j else 0.0) for i in range(k) for j in range(k)
        )

    def score(self, a: int, b: int) -> float:
        return self.table[a][b]


def make_lcs_scheme(alphabet: Alphabet) -> ScoringScheme:
    """Identity scores with zero gap price: the optimal score is the LCS length."""
    k = len(alphabet)
    table = tuple(tuple(1.0 if i == j else 0.0 for j in range(k)) for i in range(k))
    return ScoringScheme(alphabet, table, 0.0)


@dataclass(frozen=True)
class SymbolDist:
    alphabet: Alphabet
    p: tuple[float, ...] = field(default=())

    def __post_init__(self):
        p = tuple(float(v) for v in self.p)
        object.__setattr__(self, "p", p)
        if len(p) != len(self.alphabet):
            raise DimensionError(
                f"{len(p)} probabilities for an alphabet of size {len(self.alphabet)}", key="probs"
            )
        for i, v in enumerate(p):
            if not v > 0:
                raise ValidationError(f"probability of symbol {self.alphabet.symbols[i]!r} must be > 0",
                                      key=f"probs[{i}]")
        if abs(sum(p) - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"probabilities sum to {sum(p)!r}, not 1", key="probs")

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "SymbolDist":
        k = len(alphabet)
        return cls(alphabet, tuple([1.0 / k] * k))

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.p, dtype=float)


def mimi_margin(scheme: ScoringScheme, dist: SymbolDist, a: int | str, b: int | str) -> Fraction:
    """Exact value of ``sum_c P(c) * (S(b, c) - S(a, c))`` as a rational.

    The float inputs are converted to their exact binary rationals, so the sign
    of the result is not subject to rounding.
    """
    if len(scheme.alphabet) != len(dist.alphabet):
        raise DimensionError("scheme and distribution use alphabets of different sizes")
    ia, ib = scheme.alphabet.index(a), scheme.alphabet.index(b)
    if ia == ib:
        raise ValidationError("the two letters must differ")
    total = Fraction(0)
    for c, pc in enumerate(dist.p):
        total += Fraction(pc) * (Fraction(scheme.table[ib][c]) - Fraction(scheme.table[ia][c]))
    return total


def check_mimi(scheme: ScoringScheme, dist: SymbolDist, a: int | str, b: int | str) -> bool:
    """Strict positivity of the expected score advantage of ``b`` over ``a``."""
    return mimi_margin(scheme, dist, a, b) > 0


# -- config loading -----------------------------------------------------------

def read_config(path: str | Path) -> dict[str, Any]:
    """Read a JSON or YAML mapping; the format is picked by file suffix."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml

        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be a mapping")
    return data


def alphabet_from_config(cfg: dict[str, Any]) -> Alphabet:
    if "alphabet" not in cfg:
        raise ValidationError("missing key", key="alphabet")
    return Alphabet.of(cfg["alphabet"])


def scheme_from_config(cfg: dict[str, Any]) -> ScoringScheme:
    """Build a scheme from ``alphabet``, ``score_table`` and ``gap_price``.

    ``score_table: lcs`` (or a missing table) selects the identity scheme.
    """
    alphabet = alphabet_from_config(cfg)
    table = cfg.get("score_table", "lcs")
    if table == "lcs":
        scheme = make_lcs_scheme(alphabet)
        if cfg.get("gap_price", 0.0) != 0.0:
            scheme = ScoringScheme(alphabet, scheme.table, cfg["gap_price"])
        return scheme
    return ScoringScheme(alphabet, tuple(tuple(r) for r in table), cfg.get("gap_price", 0.0))


def dist_from_config(cfg: dict[str, Any]) -> SymbolDist:
    alphabet = alphabet_from_config(cfg)
    if "probs" not in cfg:
        return SymbolDist.uniform(alphabet)
    return SymbolDist(alphabet, tuple(cfg["probs"]))


def scheme_to_config(scheme: ScoringScheme) -> dict[str, Any]:
    return {
        "alphabet": list(scheme.alphabet.symbols),
        "score_table": [list(r) for r in scheme.table],
        "gap_price": scheme.delta,
    }
