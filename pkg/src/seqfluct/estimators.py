"""Monte Carlo estimators for score fluctuations and their driving conditions.

Every estimator draws sample ``i`` from the substream ``(seed, prefix + (i,))``
and evaluates samples through :func:`seqfluct.runner.run_kernel`, so results
are bit-identical for any worker count.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .align import score_batch
from .core import ScoringScheme, scheme_to_config
from .errors import InvariantViolation, TransformInapplicableError, ValidationError
from .genmodels import BlockModel, IIDModel, log_tur_pmf_grid, pack_v, typical_sets, unpack_v
from .reports import EstimateReport, fingerprint
from .rng import RandomStream
from .runner import run_kernel
from .stats import Z95, Welford, jackknife_variance, mean_ci, proportion_ci
from .transforms import BlockTransform, LetterSwap, Transform, apply_arrays, outcome_gains

MIN_HITS = 30
PILOT_QUANTILE = 0.95
PILOT_SAMPLES = 2000

# substream prefixes keep the different sample families independent
MAIN, PILOT = 0, 1


def params_fingerprint(model, scheme: ScoringScheme | None = None, **extra) -> str:
    cfg = {"model": model.describe()}
    if scheme is not None:
        cfg["scheme"] = scheme_to_config(scheme)
    cfg.update(extra)
    return fingerprint(cfg)


def _check_common(n: int, samples: int, min_samples: int = 1):
    if n < 1:
        raise ValidationError("n must be >= 1", key="n")
    if samples < min_samples:
        raise ValidationError(f"samples must be >= {min_samples}", key="samples")


# -- kernels -------------------------------------------------------------------------------

@dataclass(frozen=True)
class ScoreKernel:
    """Per sample: ``L(z)``, ``u`` and packed ``v``."""

    model: object
    n: int
    scheme: ScoringScheme
    seed: int
    prefix: tuple = (MAIN,)

    def __call__(self, start: int, stop: int):
        m, n = stop - start, self.n
        X = np.empty((m, n), dtype=np.int64)
        Y = np.empty((m, n), dtype=np.int64)
        U = np.empty(m, dtype=np.int64)
        V = np.empty(m, dtype=np.int64)
        for j, i in enumerate(range(start, stop)):
            rng = RandomStream(self.seed, self.prefix + (i,))
            x, y = self.model.sample_arrays(n, rng)
            X[j], Y[j] = x, y
            u, v = self.model.uv_arrays(x, y)
            U[j], V[j] = u, pack_v(self.model, v)
        L = score_batch(X, Y, self.scheme).astype(float) if m else np.zeros(0)
        return L, U, V


@dataclass(frozen=True)
class GainKernel:
    """Per sample: exact mean and minimum gain over all outcomes (``nan`` if inapplicable)."""

    model: object
    n: int
    transform: Transform
    scheme: ScoringScheme
    seed: int
    prefix: tuple = (MAIN,)

    def __call__(self, start: int, stop: int):
        m = stop - start
        mean = np.full(m, np.nan)
        low = np.full(m, np.nan)
        U = np.empty(m, dtype=np.int64)
        V = np.empty(m, dtype=np.int64)
        for j, i in enumerate(range(start, stop)):
            rng = RandomStream(self.seed, self.prefix + (i,))
            x, y = self.model.sample_arrays(self.n, rng)
            u, v = self.model.uv_arrays(x, y)
            U[j], V[j] = u, pack_v(self.model, v)
            try:
                _, gains = outcome_gains(x, y, self.transform, self.scheme)
            except TransformInapplicableError:
                continue
            mean[j] = gains.mean()
            low[j] = gains.min()
        return mean, low, U, V


@dataclass(frozen=True)
class CoupledKernel:
    """Per sample: ``L(z)``, ``u``, packed ``v`` and the conditional gain.

    ``inner="exact"`` averages over every outcome of the transformation,
    ``inner="single"`` uses one random outcome.
    """

    model: object
    n: int
    transform: Transform
    scheme: ScoringScheme
    seed: int
    inner: str = "exact"
    prefix: tuple = (MAIN,)

    def __call__(self, start: int, stop: int):
        m = stop - start
        L = np.empty(m)
        G = np.full(m, np.nan)
        U = np.empty(m, dtype=np.int64)
        V = np.empty(m, dtype=np.int64)
        for j, i in enumerate(range(start, stop)):
            rng = RandomStream(self.seed, self.prefix + (i,))
            x, y = self.model.sample_arrays(self.n, rng)
            u, v = self.model.uv_arrays(x, y)
            U[j], V[j] = u, pack_v(self.model, v)
            try:
                if self.inner == "exact":
                    base, gains = outcome_gains(x, y, self.transform, self.scheme)
                    G[j] = gains.mean()
                else:
                    base = float(score_batch(x[None], y[None], self.scheme)[0])
                    xt, yt = apply_arrays(x, y, self.transform, rng)
                    G[j] = float(score_batch(xt[None], yt[None], self.scheme)[0]) - base
            except TransformInapplicableError:
                base = float(score_batch(x[None], y[None], self.scheme)[0])
            L[j] = base
        return L, U, V, G


@dataclass(frozen=True)
class UVKernel:
    """Per sample: ``u`` and ``v`` only (no alignment)."""

    model: object
    n: int
    seed: int
    prefix: tuple = (MAIN,)

    def __call__(self, start: int, stop: int):
        m = stop - start
        U = np.empty(m, dtype=np.int64)
        V = np.empty(m, dtype=np.int64)
        for j, i in enumerate(range(start, stop)):
            u, v = self.model.sample_uv(self.n, RandomStream(self.seed, self.prefix + (i,)))
            U[j], V[j] = u, pack_v(self.model, v)
        return U, V


# -- moments -------------------------------------------------------------------------------

@dataclass(frozen=True)
class Moments:
    mean: EstimateReport
    var: EstimateReport
    gamma: EstimateReport

    def reports(self) -> list[EstimateReport]:
        return [self.mean, self.var, self.gamma]


def mc_moments(model, n: int, scheme: ScoringScheme, samples: int, seed: int, workers: int = 1,
               prefix: tuple = (MAIN,)) -> Moments:
    """Sample mean and unbiased variance of ``L`` with 95% CIs, and ``gamma = mean / n``."""
    _check_common(n, samples, 2)
    L, _, _ = run_kernel(ScoreKernel(model, n, scheme, seed, prefix), samples, workers)
    fp = params_fingerprint(model, scheme, n=n)
    m, mh = mean_ci(L)
    v, vh = jackknife_variance(L)
    return Moments(
        EstimateReport("mean_L", m, mh, samples, seed, fp, n),
        EstimateReport("var_L", v, vh, samples, seed, fp, n),
        EstimateReport("gamma", m / n, mh / n, samples, seed, fp, n),
    )


@dataclass(frozen=True)
class ScanResult:
    rows: list[dict]
    slope: float
    intercept: float
    ratio_max_min: float
    min_var_over_n: float
    b_hat: float  # largest Var/n seen; upper-bound sanity
    all_ci_exclude_zero: bool
    reports: list[EstimateReport]


def variance_scan(model, scheme: ScoringScheme, n_list, samples: int, seed: int, workers: int = 1) -> ScanResult:
    """``Var L_n`` across ``n`` with jackknife CIs and a least-squares line ``Var = slope*n + b``."""
    n_list = [int(n) for n in n_list]
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValidationError("n_list must be non-empty and strictly increasing", key="n")
    rows, reports = [], []
    for n in n_list:
        mom = mc_moments(model, n, scheme, samples, seed, workers, prefix=(MAIN, n))
        v, vh = mom.var.point, mom.var.half_width
        rows.append({"n": n, "var": v, "ci95": vh, "var_over_n": v / n, "ci95_over_n": vh / n,
                     "mean": mom.mean.point, "gamma": mom.gamma.point})
        fp = mom.var.params_fingerprint
        reports += [mom.var, EstimateReport("var_over_n", v / n, vh / n, samples, seed, fp, n), mom.gamma]
    ns = np.array(n_list, dtype=float)
    vs = np.array([r["var"] for r in rows])
    if len(ns) >= 2:
        slope, intercept = np.polyfit(ns, vs, 1)
    else:
        slope, intercept = vs[0] / ns[0], 0.0
    per = vs / ns
    lo = min(per)
    return ScanResult(
        rows, float(slope), float(intercept),
        float(max(per) / lo) if lo > 0 else math.inf, float(lo), float(max(per)),
        all(r["var"] - r["ci95"] > 0 for r in rows), reports,
    )


def gamma_scan(model, scheme: ScoringScheme, n_list, samples: int, seed: int, workers: int = 1) -> list[Moments]:
    """``gamma = E L_n / n`` estimates across ``n``."""
    return [mc_moments(model, int(n), scheme, samples, seed, workers, prefix=(MAIN, int(n))) for n in n_list]


# -- A1 / A2 -------------------------------------------------------------------------------

@dataclass(frozen=True)
class A1Result:
    report: EstimateReport  # fraction of samples with conditional gain >= eps0
    eps0: float
    eps0_source: str
    inapplicable: int
    quantiles: dict
    histogram: list  # [(gain, count)] over applicable samples

    @property
    def inapplicable_fraction(self) -> float:
        return self.inapplicable / self.report.samples


def _histogram(values: np.ndarray) -> list:
    vals, counts = np.unique(np.round(values, 9), return_counts=True)
    return [(float(v), int(c)) for v, c in zip(vals, counts)]


def _resolve_transform(model, transform: Transform | None) -> Transform:
    t = transform or model.transform()
    if isinstance(t, LetterSwap):
        a, b = t.letters(model.alphabet)
        return LetterSwap(a, b)
    return t


def verify_a1(model, n: int, transform: Transform | None, scheme: ScoringScheme, eps0: float | None,
              samples: int, seed: int, workers: int = 1) -> A1Result:
    """Fraction of ``z`` with exact ``E[L(Z~) - L(Z) | Z=z] >= eps0``.

    Inapplicable ``z`` count as failures. When ``eps0`` is ``None`` it is set
    to the 1st percentile of the observed gains and flagged as such.
    """
    _check_common(n, samples)
    if eps0 is not None and not eps0 > 0:
        raise ValidationError("eps0 must be > 0", key="eps0")
    t = _resolve_transform(model, transform)
    mean, _, _, _ = run_kernel(GainKernel(model, n, t, scheme, seed), samples, workers)
    ok = ~np.isnan(mean)
    gains = mean[ok]
    source = "user"
    if eps0 is None:
        eps0 = float(np.quantile(gains, 0.01)) if len(gains) else float("nan")
        source = "1st percentile of observed gains"
    hits = int(np.count_nonzero(gains >= eps0)) if len(gains) else 0
    p, h = proportion_ci(hits, samples)
    qs = {str(q): float(np.quantile(gains, q)) for q in (0.01, 0.05, 0.25, 0.5, 0.75, 0.95)} if len(gains) else {}
    fp = params_fingerprint(model, scheme, n=n, transform=repr(t), eps0=eps0)
    return A1Result(EstimateReport("a1_fraction", p, h, samples, seed, fp, n), eps0, source,
                    int(samples - ok.sum()), qs, _histogram(gains))


@dataclass(frozen=True)
class A2Result:
    min_gain: float
    bound: float
    samples: int
    inapplicable: int
    outcomes_checked: int
    histogram: list  # [(per-sample minimum gain, count)]
    report: EstimateReport


def a2_bound(transform: Transform, scheme: ScoringScheme) -> float:
    """Largest possible score loss of one application.

    A letter swap changes one aligned pair, losing at most ``a_max``. A block
    move deletes one symbol and inserts one elsewhere, so an alignment loses at
    most one aligned pair: ``a_max - delta`` (``1`` for LCS).
    """
    if isinstance(transform, LetterSwap):
        return scheme.a_max
    return scheme.a_max - scheme.delta


def verify_a2(model, n: int, transform: Transform | None, scheme: ScoringScheme, samples: int, seed: int,
              workers: int = 1) -> A2Result:
    """Minimum of ``L(z~) - L(z)`` over sampled ``z`` and every outcome; raises on a violation."""
    _check_common(n, samples)
    t = _resolve_transform(model, transform)
    _, low, U, V = run_kernel(GainKernel(model, n, t, scheme, seed), samples, workers)
    ok = ~np.isnan(low)
    bound = a2_bound(t, scheme)
    min_gain = float(low[ok].min()) if ok.any() else float("nan")
    if isinstance(t, LetterSwap):
        checked = int(np.sum((V - U)[ok]))
    else:
        checked = -1  # not tracked per sample for block moves
    fp = params_fingerprint(model, scheme, n=n, transform=repr(t))
    report = EstimateReport("a2_min_gain", min_gain, 0.0, samples, seed, fp, n)
    res = A2Result(min_gain, bound, samples, int(samples - ok.sum()), checked, _histogram(low[ok]), report)
    if ok.any() and min_gain < -bound - 1e-9:
        raise InvariantViolation(f"score dropped by {-min_gain} > {bound} after one transformation")
    return res


# -- typical sets and the pilot ------------------------------------------------------------

def _minimal_c(model, n: int, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Per sample, the smallest ``c`` whose typical windows contain it."""
    if isinstance(model, BlockModel):
        p = model.params
        t = V // (model.l + 2)
        cu = np.abs(U - n / p.mu * (p.q2 - p.q1 - p.q3)) / math.sqrt(n)
        ct = np.abs(t - n / p.mu) / math.sqrt(n)
        return np.maximum(cu, ct)
    cv = np.abs(V - 2 * n * model.p) / math.sqrt(2 * n)
    with np.errstate(divide="ignore", invalid="ignore"):
        cu = np.where(V > 0, np.abs(U - V * model.p_b) / np.sqrt(np.maximum(V, 1)), 0.0)
    return np.maximum(cu, cv)


def pilot_c(model, n: int, seed: int, samples: int = PILOT_SAMPLES, quantile: float = PILOT_QUANTILE,
            workers: int = 1) -> float:
    """``c`` at which a pilot run reaches ``quantile`` joint coverage (independent substreams)."""
    U, V = run_kernel(UVKernel(model, n, seed, (PILOT, n)), samples, workers)
    return float(np.quantile(_minimal_c(model, n, U, V), quantile))


@dataclass(frozen=True)
class CoverageResult:
    report: EstimateReport
    c: float
    c_source: str
    exact: dict = field(default_factory=dict)  # i.i.d. only: exact coverages and Chebyshev floors


def iid_exact_coverage(model: IIDModel, n: int, c: float = 1.0) -> dict:
    """Exact window probabilities of ``V`` and ``U_(v)`` against the Chebyshev floors."""
    from scipy.stats import binom

    ts = typical_sets(model, n, c)
    p, pb = model.p, model.p_b
    lo, hi = ts.v_window
    v = np.arange(0, 2 * n + 1)
    v_cov = float(binom.pmf(v[(v >= lo) & (v <= hi)], 2 * n, p).sum())
    u_cov = []
    for vv in ts.v_values():
        if vv > 2 * n or vv == 0:
            continue
        a, b = ts.u_window(vv)
        u = np.arange(0, vv + 1)
        u_cov.append(float(binom.pmf(u[(u >= a) & (u <= b)], vv, pb).sum()))
    return {
        "v_coverage": v_cov,
        "v_floor": 1 - p * (1 - p),
        "u_coverage_min": min(u_cov) if u_cov else float("nan"),
        "u_floor": 1 - pb * (1 - pb),
    }


def coverage_check(model, n: int, c: float | None, samples: int, seed: int, workers: int = 1) -> CoverageResult:
    """Empirical ``P(U in U_n, V in V_n)``; ``c=None`` takes ``c`` from a pilot run."""
    _check_common(n, samples)
    source = "user"
    if c is None:
        c, source = pilot_c(model, n, seed, workers=workers), f"pilot ({PILOT_QUANTILE} quantile)"
    elif not c > 0:
        raise ValidationError("c must be > 0", key="c")
    U, V = run_kernel(UVKernel(model, n, seed), samples, workers)
    hits = int(np.count_nonzero(_minimal_c(model, n, U, V) <= c))
    p, h = proportion_ci(hits, samples)
    fp = params_fingerprint(model, n=n, c=c)
    exact = iid_exact_coverage(model, n, c) if isinstance(model, IIDModel) else {}
    return CoverageResult(EstimateReport("coverage", p, h, samples, seed, fp, n), c, source, exact)


# -- conditional profile ---------------------------------------------------------------------

@dataclass(frozen=True)
class Gap:
    v: object
    u: int  # gap is l(u + k0, v) - l(u, v)
    gap: float
    ci95: float
    hits: int


def _gap_summary(gaps: list[Gap]) -> dict:
    if not gaps:
        return {"count": 0, "fraction_positive": float("nan"), "delta_hat": float("nan"), "mean_gap": float("nan")}
    g = np.array([x.gap for x in gaps])
    return {
        "count": len(gaps),
        "fraction_positive": float(np.mean(g > 0)),
        "delta_hat": float(g.min()),
        "mean_gap": float(g.mean()),
        "fraction_ci_above_zero": float(np.mean([x.gap - x.ci95 > 0 for x in gaps])),
    }


@dataclass
class ConditionalProfile:
    n: int
    k0: int
    c: float
    min_hits: int
    bins: dict  # (u, v) -> Welford of L
    gain_bins: dict  # (u, v) -> Welford of the conditional gain
    model_fingerprint: str
    scheme_fingerprint: str
    direct_gaps: list
    coupled_gaps: list
    samples: int
    inapplicable: int

    @property
    def direct_summary(self) -> dict:
        return _gap_summary(self.direct_gaps)

    @property
    def coupled_summary(self) -> dict:
        return _gap_summary(self.coupled_gaps)

    def l_hat(self, u: int, v) -> float:
        return self.bins[(u, v)].mean


def _bin(keys_u, keys_v, values, model) -> dict:
    bins: dict = defaultdict(Welford)
    for u, v, x in zip(keys_u.tolist(), keys_v.tolist(), values.tolist()):
        if not math.isnan(x):
            bins[(u, unpack_v(model, v))].push(x)
    return dict(bins)


def conditional_profile(model, n: int, scheme: ScoringScheme, samples: int, seed: int, c: float | None = None,
                        transform: Transform | None = None, inner: str = "exact", min_hits: int = MIN_HITS,
                        workers: int = 1, typical_only: bool = True) -> ConditionalProfile:
    """Binned ``l(u, v)`` and two estimates of the gaps ``l(u+k0, v) - l(u, v)``.

    The direct estimate differences the bin means. The coupled estimate bins
    the conditional gain of the transformation by the ``(u, v)`` of ``z``:
    since the transformation maps ``P_(u,v)`` to ``P_(u+k0,v)``, its mean is
    the same gap, with far less noise. Bins under ``min_hits`` are excluded.
    """
    _check_common(n, samples)
    t = _resolve_transform(model, transform)
    if inner not in ("exact", "single"):
        raise ValidationError("inner must be 'exact' or 'single'", key="inner")
    if c is None:
        c = pilot_c(model, n, seed, workers=workers)
    L, U, V, G = run_kernel(CoupledKernel(model, n, t, scheme, seed, inner), samples, workers)
    bins = _bin(U, V, L, model)
    gain_bins = _bin(U, V, G, model)
    ts = typical_sets(model, n, c)
    k0 = t.k0

    def typical(u, v):
        return not typical_only or ts.contains(u, v)

    direct = []
    for (u, v), w in sorted(bins.items(), key=lambda kv: (str(kv[0][1]), kv[0][0])):
        nxt = bins.get((u + k0, v))
        if nxt is None or w.count < min_hits or nxt.count < min_hits:
            continue
        if not (typical(u, v) and typical(u + k0, v)):
            continue
        ci = Z95 * math.sqrt(w.variance / w.count + nxt.variance / nxt.count)
        direct.append(Gap(v, u, nxt.mean - w.mean, ci, min(w.count, nxt.count)))
    coupled = []
    for (u, v), w in sorted(gain_bins.items(), key=lambda kv: (str(kv[0][1]), kv[0][0])):
        if w.count < min_hits or not (typical(u, v) and typical(u + k0, v)):
            continue
        coupled.append(Gap(v, u, w.mean, Z95 * w.sem, w.count))
    return ConditionalProfile(n, k0, c, min_hits, bins, gain_bins, params_fingerprint(model, n=n),
                              params_fingerprint(model, scheme, n=n), direct, coupled, samples,
                              int(np.isnan(G).sum()))


# -- conditional variance of U --------------------------------------------------------------

@dataclass(frozen=True)
class CondVarResult:
    per_v: dict  # v -> (hits, Var^[U | U in window, V=v])
    min_var: float
    min_var_over_n: float
    exact_min_var_over_n: float | None  # i.i.d. only
    c: float


def iid_exact_condvar(model: IIDModel, n: int, c: float = 1.0) -> float:
    """``min_v Var[U_(v) | U_(v) in U_n(v)] / n`` over ``v`` in the V window, from the binomial law."""
    from .oracle import truncated_binomial_variance

    ts = typical_sets(model, n, c)
    vals = []
    for v in ts.v_values():
        if v == 0 or v > 2 * n:
            continue
        lo, hi = ts.u_window(v)
        vals.append(truncated_binomial_variance(v, model.p_b, lo, hi))
    return min(vals) / n if vals else float("nan")


def conditional_variance(model, n: int, c: float | None, samples: int, seed: int, workers: int = 1,
                         min_hits: int = MIN_HITS) -> CondVarResult:
    _check_common(n, samples)
    if c is None:
        c = pilot_c(model, n, seed, workers=workers)
    U, V = run_kernel(UVKernel(model, n, seed), samples, workers)
    ts = typical_sets(model, n, c)
    groups: dict = defaultdict(Welford)
    for u, pv in zip(U.tolist(), V.tolist()):
        v = unpack_v(model, pv)
        if ts.contains(u, v):
            groups[v].push(u)
    per_v = {v: (w.count, w.variance if w.count > 1 else 0.0) for v, w in groups.items() if w.count >= min_hits}
    mv = min((s for _, s in per_v.values()), default=float("nan"))
    exact = iid_exact_condvar(model, n, c) if isinstance(model, IIDModel) else None
    return CondVarResult(per_v, mv, mv / n, exact, c)


# -- point-mass floor ------------------------------------------------------------------------

@dataclass(frozen=True)
class FloorResult:
    n: int
    c: float
    n_min_pmf: float
    argmin: tuple
    points: int


def pointmass_floor(model, n: int, c: float = 1.0) -> FloorResult:
    """``n * min P(U=u, V=v)`` over the typical windows, restricted to the support."""
    if n < 1:
        raise ValidationError("n must be >= 1", key="n")
    ts = typical_sets(model, n, c)
    if isinstance(model, BlockModel):
        lo, hi = ts.u_window(None)
        t = np.arange(max(0, math.ceil(ts.v_window[0])), math.floor(ts.v_window[1]) + 1)
        u = np.arange(math.ceil(lo), math.floor(hi) + 1)
        best, arg, points = math.inf, (), 0
        for r in range(1, model.l + 2):
            lp = log_tur_pmf_grid(t[:, None], u[None, :], r, model.params, n)
            ok = np.isfinite(lp)
            if not ok.any():
                continue
            points += int(ok.sum())
            masked = np.where(ok, lp, np.inf)
            i = np.unravel_index(np.argmin(masked), masked.shape)
            if masked[i] < best:
                best, arg = float(masked[i]), (int(u[i[1]]), (int(t[i[0]]), r))
        return FloorResult(n, c, n * math.exp(best) if points else float("nan"), arg, points)
    from scipy.stats import binom

    best, arg, points = math.inf, (), 0
    for v in ts.v_values():
        if v > 2 * n:
            continue
        pv = binom.logpmf(v, 2 * n, model.p)
        if not np.isfinite(pv):
            continue
        a, b = ts.u_window(v)
        u = np.arange(max(0, math.ceil(a)), min(v, math.floor(b)) + 1)
        if len(u) == 0:
            continue
        lp = pv + binom.logpmf(u, v, model.p_b)
        points += len(u)
        i = int(np.argmin(lp))
        if lp[i] < best:
            best, arg = float(lp[i]), (int(u[i]), int(v))
    return FloorResult(n, c, n * math.exp(best) if points else float("nan"), arg, points)


# -- tail bounds -----------------------------------------------------------------------------

def tail_bounds(kind: str, **params) -> float:
    """``chebyshev``: ``1/zeta^2``. ``hoeffding``: ``2 exp(-delta^2 n / (2 a^2))``."""
    if kind == "chebyshev":
        zeta = params.get("zeta")
        if zeta is None or not zeta > 0:
            raise ValidationError("chebyshev needs zeta > 0", key="zeta")
        return 1.0 / zeta ** 2
    if kind == "hoeffding":
        delta, a, n = params.get("delta"), params.get("a"), params.get("n")
        if delta is None or not delta > 0:
            raise ValidationError("hoeffding needs delta > 0", key="delta")
        if a is None or not a > 0:
            raise ValidationError("hoeffding needs a > 0", key="a")
        if n is None or int(n) != n or n < 1:
            raise ValidationError("hoeffding needs an integer n >= 1", key="n")
        return 2.0 * math.exp(-delta ** 2 * n / (2 * a ** 2))
    raise ValidationError(f"unknown bound {kind!r}", key="kind")


def hoeffding_block_check(model: BlockModel, m: int, delta: float, trials: int, seed: int) -> tuple[float, float]:
    """Empirical ``P(|mean of m block lengths - mu| >= delta)`` and its Hoeffding bound."""
    p = model.params
    rng = RandomStream(seed, (MAIN,))
    cum = np.array([p.q1, p.q1 + p.q2])
    W = (p.l - 1) + np.searchsorted(cum, rng.random((trials, m)), side="right")
    a = max(abs(w - p.mu) for w in p.lengths)
    freq = float(np.mean(np.abs(W.mean(axis=1) - p.mu) >= delta))
    return freq, tail_bounds("hoeffding", delta=delta, a=a, n=m)


def chebyshev_binomial_check(m: int, prob: float, zeta: float, trials: int, seed: int) -> tuple[float, float]:
    """Empirical ``P(|X - mp| >= zeta * sd)`` for ``X ~ Binomial(m, p)`` and ``1/zeta^2``."""
    rng = RandomStream(seed, (MAIN,))
    X = rng.generator.binomial(m, prob, size=trials)
    sd = math.sqrt(m * prob * (1 - prob))
    freq = float(np.mean(np.abs(X - m * prob) >= zeta * sd))
    return freq, tail_bounds("chebyshev", zeta=zeta)
