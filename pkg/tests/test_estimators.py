import math

import numpy as np
import pytest

from seqfluct import estimators
from seqfluct.core import BINARY, Alphabet, ScoringScheme, SymbolDist, check_mimi, make_lcs_scheme
from seqfluct.errors import InvariantViolation, ValidationError
from seqfluct.estimators import (a2_bound, chebyshev_binomial_check, conditional_profile, conditional_variance,
                                 coverage_check, gamma_scan, hoeffding_block_check, iid_exact_condvar, mc_moments,
                                 pilot_c, pointmass_floor, tail_bounds, variance_scan, verify_a1, verify_a2)
from seqfluct.genmodels import BlockModel, BlockModelParams, IIDModel
from seqfluct.oracle import exact_moments
from seqfluct.transforms import BlockTransform, LetterSwap

LCS2 = make_lcs_scheme(BINARY)
BIN = IIDModel(SymbolDist.uniform(BINARY), 0, 1)
BLOCK3 = BlockModel(BlockModelParams.uniform(3))
ABC = Alphabet.of("abc")
IID3 = IIDModel(SymbolDist(ABC, (0.3, 0.3, 0.4)), "a", "b")
# b scores better than a against every letter on average, and gaps are expensive
MIMI = ScoringScheme(ABC, ((1, 0, 0), (0, 2, 0.5), (0, 0.5, 1)), -2.0)


def test_mc_moments_agree_with_exact_n4():
    mean, var = exact_moments(BIN, 4, LCS2)
    m = mc_moments(BIN, 4, LCS2, 20000, seed=3)
    assert abs(m.mean.point - mean) <= m.mean.half_width * 1.5
    assert abs(m.var.point - var) <= m.var.half_width * 1.5
    assert m.gamma.point == pytest.approx(m.mean.point / 4)


def test_mc_moments_deterministic_across_workers():
    a = mc_moments(BLOCK3, 60, LCS2, 1200, seed=11, workers=1)
    b = mc_moments(BLOCK3, 60, LCS2, 1200, seed=11, workers=2)
    assert a == b
    c = mc_moments(BLOCK3, 60, LCS2, 1200, seed=12)
    assert c.mean.point != a.mean.point


def test_mc_moments_validation():
    with pytest.raises(ValidationError):
        mc_moments(BIN, 4, LCS2, 1, seed=0)
    with pytest.raises(ValidationError):
        mc_moments(BIN, 0, LCS2, 10, seed=0)


def test_degenerate_scheme_has_zero_variance():
    zero = ScoringScheme(BINARY, ((0, 0), (0, 0)), 0.0)
    scan = variance_scan(BIN, zero, [10, 20, 40], 200, seed=1)
    assert all(r["var"] == 0 and r["ci95"] == 0 for r in scan.rows)
    assert not scan.all_ci_exclude_zero
    with pytest.raises(ValidationError):
        variance_scan(BIN, zero, [20, 10], 200, seed=1)


def test_variance_scan_is_linear_small():
    scan = variance_scan(BLOCK3, LCS2, [100, 200, 400], 2000, seed=5)
    assert scan.all_ci_exclude_zero
    assert scan.ratio_max_min < 3
    assert scan.b_hat >= scan.min_var_over_n > 0


def test_gamma_stabilises():
    res = gamma_scan(BIN, LCS2, [128, 256, 512, 1024], 400, seed=2)
    g = [m.gamma.point for m in res]
    assert all(0.7 < x < 0.83 for x in g)
    # subadditivity: increasing in n, with shrinking increments
    assert g[0] < g[1] < g[3] and g[3] - g[2] < g[1] - g[0]


def test_verify_a1_block_percentile_rule():
    res = verify_a1(BLOCK3, 300, None, LCS2, None, 300, seed=4)
    assert res.eps0_source.startswith("1st percentile")
    assert res.report.point >= 0.99 - 1e-12 - res.inapplicable_fraction
    assert sum(c for _, c in res.histogram) == 300 - res.inapplicable


def test_verify_a1_mimi_swap():
    assert check_mimi(MIMI, IID3.dist, "a", "b")
    small = verify_a1(IID3, 40, LetterSwap("a", "b"), MIMI, 0.01, 300, seed=6)
    large = verify_a1(IID3, 100, LetterSwap("a", "b"), MIMI, 0.01, 300, seed=6)
    assert large.report.point > 0.95 and large.report.point >= small.report.point
    assert large.quantiles["0.5"] > 0.2


def test_verify_a1_all_inapplicable():
    # at n=4 with l=3 no string holds both a 2-block and a 4-block
    res = verify_a1(BLOCK3, 4, None, LCS2, 0.1, 50, seed=0)
    assert res.inapplicable == 50 and res.inapplicable_fraction == 1.0 and res.report.point == 0.0
    with pytest.raises(ValidationError):
        verify_a1(BLOCK3, 40, None, LCS2, 0.0, 10, seed=0)


def test_verify_a2_bounds_and_violation(monkeypatch):
    assert a2_bound(LetterSwap(0, 1), MIMI) == 2
    assert a2_bound(BlockTransform(3), LCS2) == 1
    res = verify_a2(BLOCK3, 60, None, LCS2, 300, seed=1)
    assert res.min_gain >= -1 and res.bound == 1
    res = verify_a2(IID3, 8, None, MIMI, 300, seed=1)
    assert res.min_gain >= -2 and res.outcomes_checked > 0
    monkeypatch.setattr(estimators, "a2_bound", lambda t, s: 0.0)
    with pytest.raises(InvariantViolation):
        verify_a2(BLOCK3, 60, None, LCS2, 300, seed=1)


def test_coverage_iid_exact_floor():
    m = IIDModel(SymbolDist(Alphabet.of("abcd"), (0.25, 0.25, 0.25, 0.25)), "a", "b")
    res = coverage_check(m, 800, 1.0, 500, seed=2)
    assert res.exact["v_coverage"] >= res.exact["v_floor"] == 0.75
    assert res.exact["u_coverage_min"] >= res.exact["u_floor"]
    big = coverage_check(BLOCK3, 300, 50.0, 500, seed=2)
    assert big.report.point == 1.0
    with pytest.raises(ValidationError):
        coverage_check(BLOCK3, 300, 0.0, 10, seed=2)


def test_pilot_c_is_reproducible_and_reaches_target():
    c = pilot_c(BLOCK3, 1000, seed=9)
    assert c == pilot_c(BLOCK3, 1000, seed=9, workers=2)
    res = coverage_check(BLOCK3, 1000, None, 2000, seed=9)
    assert res.c == c and res.report.point > 0.9


def test_conditional_variance_iid_exact_and_block():
    for n in (100, 1000, 10000):
        assert iid_exact_condvar(IID3, n) > 0.05
    res = conditional_variance(BLOCK3, 400, 1.0, 3000, seed=1)
    assert res.min_var > 0 and res.exact_min_var_over_n is None
    assert all(h >= 30 for h, _ in res.per_v.values())
    tiny = conditional_variance(IID3, 50, 1e-3, 200, seed=1)
    assert all(s == 0 for _, s in tiny.per_v.values())


def test_profile_bins_account_for_every_sample():
    prof = conditional_profile(IID3, 6, make_lcs_scheme(ABC), 2000, seed=3, c=1.0, typical_only=False)
    assert sum(w.count for w in prof.bins.values()) == 2000
    assert sum(w.count for w in prof.gain_bins.values()) == 2000 - prof.inapplicable
    for g in prof.coupled_gaps:
        assert g.hits >= 30
    with pytest.raises(ValidationError):
        conditional_profile(IID3, 6, make_lcs_scheme(ABC), 10, seed=3, inner="median")


def test_pointmass_floor_stable():
    iid = [pointmass_floor(IID3, n).n_min_pmf for n in (100, 1000, 10000)]
    assert min(iid) > 0 and max(iid) / min(iid) < 5
    blk = pointmass_floor(BLOCK3, 10000)
    assert blk.n_min_pmf > 0 and blk.points > 0
    with pytest.raises(ValidationError):
        pointmass_floor(BLOCK3, 0)


def test_tail_bounds():
    assert tail_bounds("chebyshev", zeta=2) == 0.25
    assert tail_bounds("hoeffding", delta=1.5, a=1.5, n=8) == pytest.approx(2 * math.exp(-4))
    for kind, kw in [("chebyshev", {"zeta": 0}), ("hoeffding", {"delta": 1, "a": 0, "n": 3}),
                     ("hoeffding", {"delta": 1, "a": 1, "n": 2.5}), ("gauss", {})]:
        with pytest.raises(ValidationError):
            tail_bounds(kind, **kw)


def test_empirical_tails_below_bounds():
    freq, bound = hoeffding_block_check(BLOCK3, 50, 0.3, 20000, seed=1)
    assert freq <= bound
    freq, bound = chebyshev_binomial_check(200, 0.3, 1.5, 20000, seed=1)
    assert freq <= bound


def test_binned_means_never_explain_more_than_total_variance():
    prof = conditional_profile(BLOCK3, 60, LCS2, 3000, seed=8, c=1.0, typical_only=False)
    counts = np.array([w.count for w in prof.bins.values()], dtype=float)
    means = np.array([w.mean for w in prof.bins.values()])
    m2 = np.array([w.m2 for w in prof.bins.values()])
    total_n = counts.sum()
    grand = np.dot(counts, means) / total_n
    between = np.dot(counts, (means - grand) ** 2) / total_n
    total = (m2.sum() + np.dot(counts, (means - grand) ** 2)) / total_n
    mom = mc_moments(BLOCK3, 60, LCS2, 3000, seed=8)
    assert between <= total + 1e-9
    assert total == pytest.approx(mom.var.point * (total_n - 1) / total_n, rel=1e-9)
