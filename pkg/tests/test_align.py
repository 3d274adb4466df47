import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqfluct.align import (brute_force_score, dp_scores, lcs_arrays, lcs_batch, lcs_length, lcs_rows_vs,
                            optimal_score, score_batch)
from seqfluct.core import BINARY, Alphabet, ScoringScheme, Sequence, make_lcs_scheme, make_pair
from seqfluct.errors import DimensionError, ResourceGuardError, ValidationError

LCS2 = make_lcs_scheme(BINARY)


def is_subsequence(w: str, s: str) -> bool:
    it = iter(s)
    return all(ch in it for ch in w)


def textbook_lcs(a: str, b: str) -> int:
    D = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i, ca in enumerate(a, 1):
        for j, cb in enumerate(b, 1):
            D[i][j] = D[i - 1][j - 1] + 1 if ca == cb else max(D[i - 1][j], D[i][j - 1])
    return D[-1][-1]


@pytest.mark.parametrize("x, y, witness", [
    ("100101100001101", "111000010101110", "11100001101"),
    ("11100010101101", "11101100101000", "11100010100"),
])
def test_worked_pairs_have_lcs_eleven(x, y, witness):
    # an 11-letter common subsequence, and the textbook table agrees it is maximal
    assert is_subsequence(witness, x) and is_subsequence(witness, y)
    assert textbook_lcs(x, y) == 11
    z = make_pair(BINARY, x, y)
    assert lcs_length(z.x, z.y) == 11
    assert optimal_score(z.x, z.y, LCS2).value == 11


def test_lcs_fast_paths_agree_with_dp():
    rng = np.random.default_rng(0)
    for n, k in [(1, 2), (7, 2), (40, 3), (63, 2), (64, 2), (150, 4)]:
        X = rng.integers(0, k, (30, n))
        Y = rng.integers(0, k, (30, n))
        scheme = make_lcs_scheme(Alphabet(tuple(str(i) for i in range(k))))
        ref = dp_scores(X, Y, scheme)
        assert np.array_equal(lcs_batch(X, Y, k), ref)
        assert [lcs_arrays(a, b, k) for a, b in zip(X, Y)] == ref.tolist()
        assert np.array_equal(lcs_rows_vs(X, Y[0], k), dp_scores(X, np.repeat(Y[:1], 30, 0), scheme))


def test_brute_force_matches_dp_exhaustively_small():
    schemes = [LCS2, ScoringScheme(BINARY, ((2, 0), (0, 1)), -1.0),
               ScoringScheme(BINARY, ((1, 0.25), (0.25, 1)), 0.5)]
    for n in range(1, 5):
        for bits in itertools.product("01", repeat=2 * n):
            z = make_pair(BINARY, "".join(bits[:n]), "".join(bits[n:]))
            for s in schemes:
                assert optimal_score(z.x, z.y, s).value == pytest.approx(brute_force_score(z.x, z.y, s).value)


def test_empty_alignment_is_allowed():
    # with a high gap price the empty alignment (all gaps) wins
    s = ScoringScheme(BINARY, ((1, 0), (0, 1)), 1.0)
    z = make_pair(BINARY, "01", "10")
    assert optimal_score(z.x, z.y, s).value == 2.0
    zero = ScoringScheme(BINARY, ((0, 0), (0, 0)), 0.0)
    assert optimal_score(z.x, z.y, zero).value == 0


def test_input_validation():
    a = Sequence.from_string(BINARY, "01")
    with pytest.raises(ValidationError):
        optimal_score(a, Sequence.from_string(BINARY, "0"), LCS2)
    with pytest.raises(DimensionError):
        optimal_score(a, Sequence.from_string(Alphabet.of("ab"), "ab"), LCS2)
    big = Sequence.from_string(BINARY, "0" * 13)
    with pytest.raises(ResourceGuardError):
        brute_force_score(big, big, LCS2)


def test_integral_scores_come_back_as_int():
    z = make_pair(BINARY, "0110", "1010")
    assert isinstance(optimal_score(z.x, z.y, LCS2).value, int)
    assert isinstance(brute_force_score(z.x, z.y, LCS2).value, int)


pairs = st.integers(1, 30).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 2), min_size=n, max_size=n),
                        st.lists(st.integers(0, 2), min_size=n, max_size=n)))


@settings(max_examples=60, deadline=None)
@given(pairs, st.floats(-2, 1))
def test_score_properties(pair, delta):
    x, y = (np.array(v) for v in pair)
    n = len(x)
    table = ((1, 0.5, 0), (0.5, 1, 0.2), (0, 0.2, 1))
    s = ScoringScheme(Alphabet.of("abc"), table, delta)
    sxy = dp_scores(x, y, s)[0]
    # symmetric table: L(x, y) = L(y, x)
    assert sxy == pytest.approx(dp_scores(y, x, s)[0])
    # never below the all-gaps alignment, never above n * a_max
    assert sxy >= delta * n - 1e-9
    assert sxy <= max(1.0, delta) * n + 1e-9
    lcs = lcs_arrays(x, y, 3)
    assert 0 <= lcs <= n and lcs == lcs_arrays(y, x, 3)


def test_score_batch_dispatch():
    X = np.array([[0, 1, 1], [1, 1, 1]])
    Y = np.array([[1, 1, 0], [1, 1, 1]])
    assert score_batch(X, Y, LCS2).tolist() == [2, 3]
