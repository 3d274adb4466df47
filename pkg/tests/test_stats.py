import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqfluct.errors import ValidationError
from seqfluct.reports import EstimateReport, csv_text, fingerprint, json_text, write_outputs
from seqfluct.runner import chunk_ranges, run_kernel
from seqfluct.stats import Z95, Welford, jackknife_variance, mean_ci, proportion_ci, welford_of


@settings(max_examples=100)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=60), st.integers(0, 60))
def test_welford_matches_numpy_and_merges(xs, cut):
    w = welford_of(xs)
    assert w.count == len(xs)
    assert w.mean == pytest.approx(np.mean(xs), abs=1e-9)
    assert w.variance == pytest.approx(np.var(xs, ddof=1), rel=1e-9, abs=1e-9)
    cut = min(cut, len(xs))
    merged = welford_of(xs[:cut]).merge(welford_of(xs[cut:]))
    assert merged.mean == pytest.approx(w.mean, abs=1e-9)
    assert merged.variance == pytest.approx(w.variance, rel=1e-9, abs=1e-9)


def test_ci_helpers():
    m, h = mean_ci([1.0, 2.0, 3.0])
    assert m == 2.0 and h == pytest.approx(Z95 * 1.0 / np.sqrt(3))
    p, h = proportion_ci(30, 100)
    assert p == 0.3 and h == pytest.approx(Z95 * np.sqrt(0.21 / 100))
    assert proportion_ci(0, 10) == (0.0, 0.0)


def test_jackknife_variance_is_close_to_sample_variance():
    x = np.random.default_rng(1).normal(0, 2, 5000)
    v, h = jackknife_variance(x)
    assert v == pytest.approx(np.var(x, ddof=1), rel=1e-2)
    assert 0 < h < 0.5 and abs(v - 4) < h * 1.5
    assert jackknife_variance(np.zeros(100)) == (0.0, 0.0)


def _square(lo, hi):
    i = np.arange(lo, hi)
    return i * i, -i


def test_runner_order_is_independent_of_workers():
    assert chunk_ranges(7, 3) == [(0, 3), (3, 6), (6, 7)]
    one = run_kernel(_square, 1234, workers=1, chunk=100)
    two = run_kernel(_square, 1234, workers=3, chunk=100)
    assert all(np.array_equal(a, b) for a, b in zip(one, two))
    assert one[0][-1] == 1233 ** 2


def test_report_serialisation_is_canonical(tmp_path):
    assert fingerprint({"b": 1, "a": [1, 2]}) == fingerprint({"a": [1, 2], "b": 1})
    assert len(fingerprint({})) == 16
    r = EstimateReport("var_L", 1.5, 0.25, 100, 7, "abc", n=10)
    assert r.lower == 1.25 and r.upper == 1.75
    text = csv_text([r])
    assert text.splitlines()[0] == "n,stat,point,ci95,samples,seed,fingerprint"
    doc = json.loads(json_text("gamma", {"n": 10}, 7, [r]))
    assert doc["schema_version"] == 1 and doc["seed"] == 7 and doc["fingerprint"] == fingerprint({"n": 10})
    write_outputs(tmp_path / "out", "gamma", {"n": 10}, 7, [r])
    assert (tmp_path / "out.csv").read_text() == text
    with pytest.raises(ValidationError):
        EstimateReport("x", 1.0, -1.0, 1, 0, "f")
