import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom, chisquare

from seqfluct.core import BINARY, Alphabet, Sequence, SymbolDist, make_pair
from seqfluct.errors import InfeasibleTripleError, MalformedSequenceError, ValidationError
from seqfluct.genmodels import (BlockModel, BlockModelParams, BlockStats, IIDModel, block_counts_pmf,
                                block_seq_prob, block_stats, build_block_sequence, iid_uv, log_tur_pmf_grid,
                                model_from_config, multinomial_coef, run_lengths, sample_block, sample_iid,
                                stats_from_lengths, tur_pmf, tur_to_blocks, typical_sets, uv_from_blocks)
from seqfluct.oracle import block_sequences, pair_space
from seqfluct.rng import RandomStream

UNIFORM3 = BlockModelParams.uniform(3)


# -- parameters --------------------------------------------------------------------------------

def test_params_validation_names_q3():
    with pytest.raises(ValidationError) as e:
        BlockModelParams(3, 0.3, 0.3, 0.3)
    assert e.value.key == "q3"
    with pytest.raises(ValidationError):
        BlockModelParams(1, 0.2, 0.3, 0.5)
    with pytest.raises(ValidationError):
        BlockModelParams(3, 0.0, 0.5, 0.5)


@given(st.integers(2, 20), st.floats(0.01, 0.98), st.floats(0.0, 1.0))
def test_mu_is_mean_block_length(l, q1, frac):
    q2 = (1 - q1) * min(max(frac, 0.01), 0.99)
    q3 = 1 - q1 - q2
    p = BlockModelParams(l, q1, q2, q3)
    assert p.mu == pytest.approx((l - 1) * q1 + l * q2 + (l + 1) * q3, rel=1e-12)


# -- construction and block statistics -----------------------------------------------------------

def test_construction_example():
    x = build_block_sequence([2, 3, 2, 4, 3, 3], 0, 13)
    assert str(x) == "0011100111100"
    assert block_stats(x, 3) == BlockStats(2, 1, 1, 2)


def test_single_run_is_trailing():
    x = Sequence.from_string(BINARY, "000")
    assert block_stats(x, 3) == BlockStats(0, 0, 0, 3)


def test_malformed_sequences():
    with pytest.raises(MalformedSequenceError):
        block_stats(Sequence.from_string(BINARY, "0100"), 3)  # interior block of length 1
    with pytest.raises(MalformedSequenceError):
        block_stats(Sequence.from_string(BINARY, "0011111"), 3)  # trailing run 5 > l+1


def test_uv_from_blocks_examples():
    uv = uv_from_blocks(BlockStats(2, 1, 1, 2), 13, 3)
    assert (uv.u, uv.v) == (-2, (4, 2))
    m, r = 5, 2
    uv = uv_from_blocks(BlockStats(0, m, 0, r), 3 * m + r, 3)
    assert uv.u == m and uv.v == (m, r)
    with pytest.raises(ValidationError):
        uv_from_blocks(BlockStats(2, 1, 1, 2), 14, 3)


def test_tur_to_blocks_examples():
    assert tur_to_blocks(4, -2, 2, 13, 3) == BlockStats(2, 1, 1, 2)
    assert tur_to_blocks(5, 5, 2, 17, 3) == BlockStats(0, 5, 0, 2)
    b, c = tur_to_blocks(6, -2, 1, 19, 3), tur_to_blocks(6, 2, 1, 19, 3)
    assert (c.b1, c.b2, c.b3) == (b.b1 - 1, b.b2 + 2, b.b3 - 1)
    with pytest.raises(InfeasibleTripleError):
        tur_to_blocks(4, -1, 2, 13, 3)  # parity
    with pytest.raises(InfeasibleTripleError):
        tur_to_blocks(4, -2, 5, 13, 3)  # r > l+1
    with pytest.raises(InfeasibleTripleError):
        tur_to_blocks(1, 1, 1, 40, 3)  # negative counts


def test_bijection_exhaustive():
    for l, nmax in ((2, 14), (3, 18), (4, 20)):
        for n in range(1, nmax + 1):
            rows, _ = block_sequences(BlockModelParams.uniform(l), n)
            for row in rows:
                s = block_stats(Sequence.from_array(BINARY, row), l)
                assert s.length(l) == n
                uv = uv_from_blocks(s, n, l)
                assert tur_to_blocks(uv.v[0], uv.u, uv.v[1], n, l) == s


def test_bijection_all_counts_up_to_20():
    for l in (2, 3, 4, 5):
        for b1 in range(0, 21):
            for b2 in range(0, 21):
                for b3 in range(0, 21):
                    for r in range(1, l + 2):
                        s = BlockStats(b1, b2, b3, r)
                        n = s.length(l)
                        if n > 20:
                            continue
                        uv = uv_from_blocks(s, n, l)
                        assert tur_to_blocks(uv.v[0], uv.u, r, n, l) == s


@settings(max_examples=200)
@given(st.integers(2, 12), st.integers(0, 60), st.integers(0, 60), st.integers(0, 60), st.integers(1, 13))
def test_bijection_random(l, b1, b2, b3, r):
    r = min(r, l + 1)
    s = BlockStats(b1, b2, b3, r)
    n = s.length(l)
    uv = uv_from_blocks(s, n, l)
    assert (uv.u - uv.v[0]) % 2 == 0
    assert tur_to_blocks(uv.v[0], uv.u, r, n, l) == s


# -- sampling -----------------------------------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.integers(2, 9), st.integers(1, 300), st.integers(0, 2 ** 32))
def test_sampled_blocks_conserve_length(l, n, seed):
    x = sample_block(n, BlockModelParams.uniform(l), RandomStream(seed))
    s = block_stats(x, l)  # raises if any interior block is out of range
    assert (l - 1) * s.b1 + l * s.b2 + (l + 1) * s.b3 + s.r == n
    assert 1 <= s.r <= l + 1


def test_sample_uv_matches_sequence_statistics():
    m = BlockModel(BlockModelParams(4, 0.2, 0.5, 0.3))
    for i in range(200):
        a = m.sample_uv(97, RandomStream(5, (i,)))
        x = m.sample_array(97, RandomStream(5, (i,)))
        assert a == m.uv_arrays(x)


def test_block_length_frequencies():
    params = BlockModelParams(3, 0.2, 0.5, 0.3)
    m = BlockModel(params)
    _, lengths = m.sample_lengths(10 ** 5 * 3, RandomStream(1))
    lengths = lengths[:10 ** 5]
    for w, q in zip(params.lengths, params.q):
        k = np.count_nonzero(lengths == w)
        assert abs(k - 1e5 * q) < 4 * math.sqrt(1e5 * q * (1 - q))


def test_iid_symbol_frequencies():
    a = Alphabet.of("abc")
    d = SymbolDist(a, (0.2, 0.3, 0.5))
    x = sample_iid(10 ** 6, d, RandomStream(9))
    counts = np.bincount(x.array, minlength=3)
    for c, p in zip(counts, d.p):
        assert abs(c - 1e6 * p) < 4 * math.sqrt(1e6 * p * (1 - p))


def test_sampling_is_deterministic():
    d = SymbolDist.uniform(BINARY)
    assert sample_iid(50, d, RandomStream(3)) == sample_iid(50, d, RandomStream(3))
    assert sample_block(50, UNIFORM3, RandomStream(3)) == sample_block(50, UNIFORM3, RandomStream(3))
    assert sample_iid(50, d, RandomStream(3)) != sample_iid(50, d, RandomStream(4))


# -- probabilities ------------------------------------------------------------------------------

def test_block_seq_prob_example():
    x = Sequence.from_string(BINARY, "0011100111100")
    assert block_seq_prob(x, UNIFORM3, 13) == pytest.approx(1 / 162, rel=1e-12)
    # trailing run l+1 multiplies by q3
    p = BlockModelParams(3, 0.2, 0.5, 0.3)
    y = Sequence.from_string(BINARY, "0011110000")
    assert block_seq_prob(y, p) == pytest.approx(0.5 * 0.2 * 0.3 * 0.3, rel=1e-12)
    with pytest.raises(ValidationError):
        block_seq_prob(x, UNIFORM3, 12)


def test_block_seq_prob_sums_to_multinomial_law():
    p = BlockModelParams(3, 0.2, 0.5, 0.3)
    for n in (9, 13, 14):
        rows, probs = block_sequences(p, n)
        assert probs.sum() == pytest.approx(1.0, rel=1e-12)
        groups: dict = {}
        for row, pr in zip(rows, probs):
            s = block_stats(Sequence.from_array(BINARY, row), 3)
            assert block_seq_prob(Sequence.from_array(BINARY, row), p) == pytest.approx(pr, rel=1e-12)
            groups.setdefault(s, []).append(pr)
        for s, prs in groups.items():
            # sequences sharing the counts are equally likely, and their total is the multinomial law
            assert max(prs) == pytest.approx(min(prs), rel=1e-12)
            assert sum(prs) == pytest.approx(block_counts_pmf(s, p, n), rel=1e-12)
            assert len(prs) == 2 * multinomial_coef((s.b1, s.b2, s.b3))


def test_tur_pmf_example_and_normalisation():
    assert tur_pmf(4, -2, 2, UNIFORM3, 13) == pytest.approx(12 / 81, rel=1e-12)
    assert tur_pmf(4, -1, 2, UNIFORM3, 13) == 0.0
    p = BlockModelParams(4, 0.25, 0.45, 0.3)
    for n in (5, 12, 20):
        total = sum(tur_pmf(t, u, r, p, n) for t in range(n + 1) for u in range(-t, t + 1) for r in range(1, 6))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_log_space_agrees_with_direct_evaluation():
    p = BlockModelParams(3, 0.2, 0.5, 0.3)
    for n in (60, 101, 150):
        t = np.arange(n // 4, n // 2 + 1)[:, None]
        u = np.arange(-(n // 2), n // 2)[None, :]
        grid = log_tur_pmf_grid(t, u, 2, p, n)
        for ti, ui in [(n // 3, 0), (n // 3, -2), (n // 3 + 1, 3)]:
            direct = tur_pmf(ti, ui, 2, p, n)
            g = grid[ti - n // 4, ui + n // 2]
            assert (direct == 0 and g == -np.inf) or math.exp(g) == pytest.approx(direct, rel=1e-9)


def test_tur_pmf_matches_monte_carlo():
    p = BlockModelParams(3, 0.2, 0.5, 0.3)
    m = BlockModel(p)
    n, N = 30, 10 ** 5
    counts = Counter(m.sample_uv(n, RandomStream(11, (i,))) for i in range(N))
    for (u, (t, r)), k in counts.most_common(15):
        q = tur_pmf(t, u, r, p, n)
        assert abs(k - N * q) < 4 * math.sqrt(N * q * (1 - q))


# -- i.i.d. statistics ---------------------------------------------------------------------------

def test_iid_uv_examples():
    ab = Alphabet.of("abc")
    assert (iid_uv(make_pair(ab, "cc", "cc"), "a", "b").u, iid_uv(make_pair(ab, "cc", "cc"), "a", "b").v) == (0, 0)
    uv = iid_uv(make_pair(Alphabet.of("ab"), "ab", "bb"), "a", "b")
    assert (uv.u, uv.v) == (3, 4)
    with pytest.raises(ValidationError):
        iid_uv(make_pair(ab, "ab", "ab"), "a", "a")


def test_u_marginal_is_binomial():
    a = Alphabet.of("abc")
    m = IIDModel(SymbolDist(a, (0.2, 0.3, 0.5)), "a", "b")
    n, N = 50, 20000
    us = np.array([m.sample_uv(n, RandomStream(2, (i,)))[0] for i in range(N)])
    k = np.arange(2 * n + 1)
    expected = binom.pmf(k, 2 * n, 0.3) * N
    # pool the tails so every cell has a decent expectation
    lo, hi = 15, 45
    obs = np.concatenate(([np.sum(us < lo)], np.bincount(us, minlength=2 * n + 1)[lo:hi], [np.sum(us >= hi)]))
    exp = np.concatenate(([expected[:lo].sum()], expected[lo:hi], [expected[hi:].sum()]))
    assert chisquare(obs, exp * obs.sum() / exp.sum()).pvalue > 0.001


def test_u_given_v_is_binomial_exactly():
    a = Alphabet.of("abc")
    m = IIDModel(SymbolDist(a, (0.2, 0.3, 0.5)), "a", "b")
    sp = pair_space(m, 3)
    pb = 0.3 / 0.5
    for v in range(0, 7):
        mask = sp.v == v
        pv = sp.probs[mask].sum()
        for u in range(v + 1):
            got = sp.probs[mask & (sp.u == u)].sum() / pv
            assert got == pytest.approx(binom.pmf(u, v, pb), rel=1e-10)


# -- typical sets and config ---------------------------------------------------------------------

def test_typical_set_examples():
    a = Alphabet.of("abcd")
    m = IIDModel(SymbolDist(a, (0.25, 0.25, 0.25, 0.25)), "a", "b")
    ts = typical_sets(m, 800)
    assert ts.v_window == pytest.approx((760, 840))
    assert ts.u_window(800) == pytest.approx((400 - math.sqrt(800), 400 + math.sqrt(800)))
    b = BlockModel(UNIFORM3)
    tb = typical_sets(b, 900, c=1.0)
    lo, hi = tb.u_window(None)
    assert (lo + hi) / 2 == pytest.approx(-900 / 9)
    assert tb.v_window == pytest.approx((300 - 30, 300 + 30))
    # centred on the exact means of U and T
    assert tb.contains(-100, (300, 1)) and ts.contains(400, 800)


def test_model_from_config():
    m = model_from_config({"model": "block", "l": 4, "q": [0.2, 0.5, 0.3]})
    assert m.l == 4 and m.k0 == 4
    with pytest.raises(ValidationError) as e:
        model_from_config({"model": "block", "l": 3, "q1": 0.3, "q2": 0.3, "q3": 0.3})
    assert e.value.key == "model.q3"
    i = model_from_config({"model": "iid", "alphabet": "abc", "swap": ["c", "a"]})
    assert (i.a, i.b, i.k0) == (2, 0, 1)
    with pytest.raises(ValidationError):
        model_from_config({"model": "markov"})


def test_stats_from_lengths_and_runs():
    lengths = np.array([2, 3, 4, 2, 3])
    assert stats_from_lengths(lengths, 11, 3) == BlockStats(1, 1, 1, 2)
    assert stats_from_lengths(lengths, 9, 3) == BlockStats(1, 1, 0, 4)
    assert run_lengths(np.array([0, 0, 1, 0])).tolist() == [2, 1, 1]
