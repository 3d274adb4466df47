"""Command-line entry point: ``seqfluct <command> [options]``.

Every command accepts ``--config FILE`` (JSON or YAML); explicit flags win
over config values. Exit codes: 0 ok, 2 validation error, 3 invariant
violation, 4 resource guard. Errors are also written to stderr as a one-line
JSON record.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any

from . import estimators as est
from . import oracle
from .align import optimal_score
from .core import (Alphabet, BINARY, SymbolDist, make_lcs_scheme, make_pair, read_config, scheme_from_config,
                   scheme_to_config)
from .errors import (DimensionError, InvariantViolation, ResourceGuardError, TransformInapplicableError,
                     ValidationError)
from .genmodels import (BlockModel, BlockModelParams, IIDModel, block_stats, model_from_config,
                        tur_to_blocks, uv_from_blocks)
from .reports import EstimateReport, fingerprint, write_outputs
from .rng import RandomStream
from .transforms import BlockTransform, LetterSwap, apply, expected_gain

EXIT_OK, EXIT_VALIDATION, EXIT_INVARIANT, EXIT_GUARD = 0, 2, 3, 4

MODEL_KEYS = ("model", "l", "q1", "q2", "q3", "alphabet", "probs", "swap")


# -- config assembly -------------------------------------------------------------------------

def _csv_list(text: str | None, cast=str):
    if text is None:
        return None
    return [cast(t) for t in str(text).split(",") if t != ""]


def _alphabet_arg(text: str | None):
    if text is None:
        return None
    return text.split(",") if "," in text else list(text)


def merged_config(args: argparse.Namespace) -> dict[str, Any]:
    """Config file values overridden by explicit flags."""
    cfg: dict[str, Any] = {}
    if getattr(args, "config", None):
        cfg = read_config(args.config)
    model = dict(cfg.get("model", {})) if isinstance(cfg.get("model"), dict) else {}
    if isinstance(cfg.get("model"), str):
        model["model"] = cfg["model"]
    flags = {
        "model": getattr(args, "model", None),
        "l": getattr(args, "l", None),
        "q1": getattr(args, "q1", None),
        "q2": getattr(args, "q2", None),
        "q3": getattr(args, "q3", None),
        "alphabet": _alphabet_arg(getattr(args, "alphabet", None)),
        "probs": _csv_list(getattr(args, "probs", None), float),
        "swap": _csv_list(getattr(args, "swap", None)),
    }
    model.update({k: v for k, v in flags.items() if v is not None})
    cfg["model"] = model
    if getattr(args, "scheme", None):
        cfg["scheme"] = read_config(args.scheme)
    for key in ("n", "samples", "seed", "out", "workers", "c", "eps0", "inner", "check", "min_hits"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def build_model(cfg: dict):
    spec = dict(cfg.get("model") or {})
    kind = spec.get("model", "block")
    spec["model"] = kind
    if kind == "block":
        spec.setdefault("l", 3)
        if not any(k in spec for k in ("q1", "q2", "q3", "q")):
            spec.update(q1=1 / 3, q2=1 / 3, q3=1 / 3)
    elif kind == "iid":
        spec.setdefault("alphabet", ["0", "1"])
    return model_from_config(spec)


def build_scheme(cfg: dict, model):
    spec = cfg.get("scheme")
    if not spec:
        return make_lcs_scheme(model.alphabet)
    spec = dict(spec)
    spec.setdefault("alphabet", list(model.alphabet.symbols))
    try:
        scheme = scheme_from_config(spec)
    except ValidationError as exc:
        exc.key = f"scheme.{exc.key}" if exc.key else "scheme"
        raise
    if scheme.alphabet != model.alphabet:
        raise DimensionError("scheme alphabet differs from the model alphabet", key="scheme.alphabet")
    return scheme


def _int(cfg: dict, key: str, default=None) -> int:
    val = cfg.get(key, default)
    if val is None:
        raise ValidationError("missing value", key=key)
    if isinstance(val, list):
        raise ValidationError("expected a single integer", key=key)
    try:
        out = int(val)
    except (TypeError, ValueError):
        raise ValidationError(f"{val!r} is not an integer", key=key) from None
    if out != float(val):
        raise ValidationError(f"{val!r} is not an integer", key=key)
    return out


def _int_list(cfg: dict, key: str) -> list[int]:
    val = cfg.get(key)
    if val is None:
        raise ValidationError("missing value", key=key)
    if isinstance(val, str):
        val = _csv_list(val, int)
    if isinstance(val, (int, float)):
        val = [val]
    return [int(v) for v in val]


def _seed(cfg: dict) -> int:
    seed = _int(cfg, "seed", 0)
    if not 0 <= seed < 2 ** 64:
        raise ValidationError("seed must be an unsigned 64-bit integer", key="seed")
    return seed


def _float_or_none(cfg: dict, key: str):
    val = cfg.get(key)
    if val is None:
        return None
    try:
        return float(val)
    except (TypeError, ValueError):
        raise ValidationError(f"{val!r} is not a number", key=key) from None


def _experiment_config(command: str, cfg: dict, model, scheme=None) -> dict:
    out = {"command": command, "model": model.describe()}
    if scheme is not None:
        out["scheme"] = scheme_to_config(scheme)
    for key in ("n", "samples", "seed", "c", "eps0", "inner", "check", "min_hits"):
        if key in cfg:
            out[key] = cfg[key]
    return out


def _emit(command: str, cfg: dict, exp: dict, seed: int, reports: list[EstimateReport], extra: dict,
          lines: list[str]) -> None:
    for line in lines:
        print(line)
    paths = write_outputs(cfg.get("out"), command, exp, seed, reports, extra)
    if paths:
        print(f"wrote {paths[0]} and {paths[1]}")


# -- commands ------------------------------------------------------------------------------

def cmd_score(args, cfg) -> int:
    alphabet = Alphabet.of(_alphabet_arg(args.alphabet) or ["0", "1"])
    spec = cfg.get("scheme")
    if spec:
        spec = dict(spec)
        spec.setdefault("alphabet", list(alphabet.symbols))
        scheme = scheme_from_config(spec)
    else:
        scheme = make_lcs_scheme(alphabet)
    z = make_pair(scheme.alphabet, args.x, args.y)
    print(optimal_score(z.x, z.y, scheme).value)
    return EXIT_OK


def cmd_gen(args, cfg) -> int:
    model = build_model(cfg)
    n, seed = _int(cfg, "n"), _seed(cfg)
    rng = RandomStream(seed)
    for _ in range(args.count):
        x, y = model.sample_arrays(n, rng)
        print(model.alphabet.decode(x.tolist()))
        print(model.alphabet.decode(y.tolist()))
    return EXIT_OK


def cmd_stats(args, cfg) -> int:
    model = build_model(cfg)
    if not isinstance(model, BlockModel):
        raise ValidationError("stats supports the block model only", key="model.model")
    text = args.x if args.x is not None else sys.stdin.readline().strip()
    from .core import Sequence

    x = Sequence.from_string(BINARY, text)
    s = block_stats(x, model.l)
    uv = uv_from_blocks(s, len(x), model.l)
    print(f"b1={s.b1} b2={s.b2} b3={s.b3} r={s.r} t={uv.v[0]} u={uv.u}")
    return EXIT_OK


def cmd_transform(args, cfg) -> int:
    if args.kind == "block":
        l = _int(cfg["model"], "l", args.l or 3)
        alphabet = BINARY
        t = BlockTransform(l)
    else:
        alphabet = Alphabet.of(_alphabet_arg(args.alphabet) or ["0", "1"])
        swap = cfg["model"].get("swap") or list(alphabet.symbols[:2])
        t = LetterSwap(swap[0], swap[1])
    spec = cfg.get("scheme")
    if spec:
        spec = dict(spec)
        spec.setdefault("alphabet", list(alphabet.symbols))
        scheme = scheme_from_config(spec)
    else:
        scheme = make_lcs_scheme(alphabet)
    z = make_pair(alphabet, args.x, args.y)
    zt = apply(z, t, RandomStream(_seed(cfg)))
    print(f"before x={z.x} y={z.y} L={optimal_score(z.x, z.y, scheme).value}")
    print(f"after  x={zt.x} y={zt.y} L={optimal_score(zt.x, zt.y, scheme).value}")
    print(f"exact expected gain {expected_gain(z, t, scheme)!r}")
    return EXIT_OK


def cmd_oracle(args, cfg) -> int:
    check = cfg.get("check") or args.check
    seed = _seed(cfg)
    tol = 1e-10
    if check == "tilde2":
        cfg["model"].setdefault("model", "iid")
        cfg["model"].setdefault("alphabet", ["a", "b", "c"])
        cfg["model"].setdefault("swap", ["a", "b"])
        model = build_model(cfg)
        n = _int(cfg, "n", 3)
        space = oracle.pair_space(model, n)
        t = model.transform()
        worst, fibers = 0.0, 0
        for u, v in oracle.feasible_uv(model, n, space):
            if v > u:
                pf = oracle.pushforward(model, n, u, v, t, space)
                worst = max(worst, oracle.tv_distance(pf, oracle.conditional_law(model, n, u + 1, v, space)))
                fibers += 1
        value, name = worst, "tv_max"
    elif check == "tilde":
        cfg["model"].setdefault("model", "block")
        model = build_model(cfg)
        n = _int(cfg, "n", 13)
        space = oracle.pair_space(model, n)
        t = model.transform()
        worst, fibers = 0.0, 0
        for u, (tt, r) in oracle.feasible_uv(model, n, space):
            b = tur_to_blocks(tt, u, r, n, model.l)
            if b.b1 >= 1 and b.b3 >= 1:
                pf = oracle.pushforward(model, n, u, (tt, r), t, space)
                worst = max(worst, oracle.tv_distance(pf, oracle.conditional_law(model, n, u + 4, (tt, r), space)))
                fibers += 1
        value, name = worst, "tv_max"
    elif check == "pmf":
        cfg["model"].setdefault("model", "block")
        model = build_model(cfg)
        if not isinstance(model, BlockModel):
            raise ValidationError("pmf check needs the block model", key="model.model")
        n = _int(cfg, "n", 20)
        value, name, fibers = abs(oracle.tur_pmf_check(model.params, n) - 1.0), "pmf_mass_error", 1
    elif check == "deco":
        model = build_model(cfg)
        n = _int(cfg, "n", 4)
        dec = oracle.variance_decomposition(model, n, build_scheme(cfg, model))
        value, name, fibers = abs(dec.total - dec.mean_within - dec.between), "deco_abs_error", len(dec.cond_mean)
    elif check == "fiber":
        model = build_model(cfg)
        n = _int(cfg, "n", 40)
        bad, fibers = 0, 0
        if isinstance(model, BlockModel):
            for t in range(0, n // (model.l - 1) + 1):
                for r in range(1, model.l + 2):
                    f = oracle.fiber(model, n, (t, r))
                    if len(f) > 1:
                        fibers += 1
                        bad += any(b - a != 4 for a, b in zip(f, f[1:]))
        else:
            for v in range(0, 2 * n + 1):
                f = oracle.fiber(model, n, v)
                if f:
                    fibers += 1
                    bad += f != list(range(v + 1))
        value, name, tol = float(bad), "bad_fibers", 0.5
    else:
        raise ValidationError(f"unknown check {check!r}", key="check")
    ok = value <= tol
    exp = _experiment_config("oracle", cfg, model)
    exp["check"] = check
    exp["n"] = n
    report = EstimateReport(name, value, 0.0, max(fibers, 1), seed, fingerprint(exp), n)
    _emit("oracle", cfg, exp, seed, [report], {"check": check, "pass": ok, "fibers": fibers},
          [f"{'PASS' if ok else 'FAIL'} {check} n={n} {name}={value!r} fibers={fibers}"])
    return EXIT_OK if ok else EXIT_INVARIANT


def _common(cfg, need_scheme=True):
    model = build_model(cfg)
    scheme = build_scheme(cfg, model) if need_scheme else None
    samples = _int(cfg, "samples", 1000)
    workers = _int(cfg, "workers", 1)
    if workers < 1:
        raise ValidationError("workers must be >= 1", key="workers")
    return model, scheme, samples, _seed(cfg), workers


def cmd_variance_scan(args, cfg) -> int:
    model, scheme, samples, seed, workers = _common(cfg)
    ns = _int_list(cfg, "n")
    res = est.variance_scan(model, scheme, ns, samples, seed, workers)
    lines = [f"n={r['n']} var={r['var']:.4f} ci95={r['ci95']:.4f} var/n={r['var_over_n']:.5f}" for r in res.rows]
    lines.append(f"slope={res.slope:.5f} max/min(var/n)={res.ratio_max_min:.3f}")
    extra = {"rows": res.rows, "slope": res.slope, "intercept": res.intercept, "ratio_max_min": res.ratio_max_min,
             "min_var_over_n": res.min_var_over_n, "b_hat": res.b_hat, "all_ci_exclude_zero": res.all_ci_exclude_zero}
    _emit("variance-scan", cfg, _experiment_config("variance-scan", cfg, model, scheme), seed, res.reports, extra,
          lines)
    return EXIT_OK


def cmd_gamma(args, cfg) -> int:
    model, scheme, samples, seed, workers = _common(cfg)
    ns = _int_list(cfg, "n")
    moms = est.gamma_scan(model, scheme, ns, samples, seed, workers)
    reports = [m.gamma for m in moms] + [m.mean for m in moms]
    lines = [f"n={m.gamma.n} gamma={m.gamma.point:.5f} +- {m.gamma.half_width:.5f}" for m in moms]
    _emit("gamma", cfg, _experiment_config("gamma", cfg, model, scheme), seed, reports, {}, lines)
    return EXIT_OK


def cmd_verify_a1(args, cfg) -> int:
    model, scheme, samples, seed, workers = _common(cfg)
    n = _int(cfg, "n")
    res = est.verify_a1(model, n, None, scheme, _float_or_none(cfg, "eps0"), samples, seed, workers)
    extra = {"eps0": res.eps0, "eps0_source": res.eps0_source, "inapplicable": res.inapplicable,
             "inapplicable_counted_as": "failure", "quantiles": res.quantiles, "histogram": res.histogram}
    lines = [f"P(gain >= {res.eps0:.4g}) = {res.report.point:.4f} +- {res.report.half_width:.4f}"
             f" (eps0 from {res.eps0_source}; {res.inapplicable} inapplicable, counted as failures)"]
    _emit("verify-a1", cfg, _experiment_config("verify-a1", cfg, model, scheme), seed, [res.report], extra, lines)
    return EXIT_OK


def cmd_verify_a2(args, cfg) -> int:
    model, scheme, samples, seed, workers = _common(cfg)
    n = _int(cfg, "n")
    res = est.verify_a2(model, n, None, scheme, samples, seed, workers)
    extra = {"bound": res.bound, "inapplicable": res.inapplicable, "histogram": res.histogram}
    _emit("verify-a2", cfg, _experiment_config("verify-a2", cfg, model, scheme), seed, [res.report], extra,
          [f"min gain {res.min_gain!r} (bound -{res.bound!r}); {res.inapplicable} inapplicable"])
    return EXIT_OK


def _gaps(gaps) -> list:
    return [{"v": g.v, "u": g.u, "gap": g.gap, "ci95": g.ci95, "hits": g.hits} for g in gaps]


def cmd_profile(args, cfg) -> int:
    model, scheme, samples, seed, workers = _common(cfg)
    n = _int(cfg, "n")
    inner = cfg.get("inner", "exact")
    prof = est.conditional_profile(model, n, scheme, samples, seed, _float_or_none(cfg, "c"), inner=inner,
                                   min_hits=_int(cfg, "min_hits", est.MIN_HITS), workers=workers)
    fp = prof.scheme_fingerprint
    ds, cs = prof.direct_summary, prof.coupled_summary
    reports = [
        EstimateReport("direct_fraction_positive", ds["fraction_positive"], 0.0, samples, seed, fp, n),
        EstimateReport("direct_delta_hat", ds["delta_hat"], 0.0, samples, seed, fp, n),
        EstimateReport("coupled_fraction_positive", cs["fraction_positive"], 0.0, samples, seed, fp, n),
        EstimateReport("coupled_delta_hat", cs["delta_hat"], 0.0, samples, seed, fp, n),
    ]
    bins = [{"u": u, "v": v, "count": w.count, "mean": w.mean, "m2": w.m2}
            for (u, v), w in sorted(prof.bins.items(), key=lambda kv: (str(kv[0][1]), kv[0][0]))]
    extra = {"c": prof.c, "k0": prof.k0, "min_hits": prof.min_hits, "inapplicable": prof.inapplicable,
             "direct": ds, "coupled": cs, "direct_gaps": _gaps(prof.direct_gaps),
             "coupled_gaps": _gaps(prof.coupled_gaps), "bins": bins,
             "model_fingerprint": prof.model_fingerprint}
    lines = [f"c={prof.c:.4f}; bins under {prof.min_hits} hits excluded",
             f"direct gaps: {ds['count']} positive fraction {ds['fraction_positive']:.3f} delta_hat {ds['delta_hat']:.4f}",
             f"coupled gaps: {cs['count']} positive fraction {cs['fraction_positive']:.3f} "
             f"delta_hat {cs['delta_hat']:.4f}"]
    _emit("profile", cfg, _experiment_config("profile", cfg, model, scheme), seed, reports, extra, lines)
    return EXIT_OK


def cmd_cond_var(args, cfg) -> int:
    model, _, samples, seed, workers = _common(cfg, need_scheme=False)
    n = _int(cfg, "n")
    res = est.conditional_variance(model, n, _float_or_none(cfg, "c"), samples, seed, workers)
    fp = est.params_fingerprint(model, n=n, c=res.c)
    reports = [EstimateReport("min_condvar_over_n", res.min_var_over_n, 0.0, samples, seed, fp, n)]
    if res.exact_min_var_over_n is not None:
        reports.append(EstimateReport("exact_min_condvar_over_n", res.exact_min_var_over_n, 0.0, samples, seed, fp, n))
    per_v = [{"v": v, "hits": h, "var": s} for v, (h, s) in sorted(res.per_v.items(), key=lambda kv: str(kv[0]))]
    lines = [f"min Var[U|window]/n = {res.min_var_over_n:.5f} (c={res.c:.4f})"]
    if res.exact_min_var_over_n is not None:
        lines.append(f"exact = {res.exact_min_var_over_n:.5f}")
    _emit("cond-var", cfg, _experiment_config("cond-var", cfg, model), seed, reports, {"per_v": per_v, "c": res.c},
          lines)
    return EXIT_OK


def cmd_coverage(args, cfg) -> int:
    model, _, samples, seed, workers = _common(cfg, need_scheme=False)
    n = _int(cfg, "n")
    res = est.coverage_check(model, n, _float_or_none(cfg, "c"), samples, seed, workers)
    lines = [f"coverage {res.report.point:.4f} +- {res.report.half_width:.4f} at c={res.c:.4f} ({res.c_source})"]
    for k, v in res.exact.items():
        lines.append(f"{k} = {v:.6f}")
    _emit("coverage", cfg, _experiment_config("coverage", cfg, model), seed, [res.report],
          {"c": res.c, "c_source": res.c_source, "exact": res.exact}, lines)
    return EXIT_OK


def cmd_floor(args, cfg) -> int:
    model = build_model(cfg)
    ns = _int_list(cfg, "n")
    c = _float_or_none(cfg, "c") or 1.0
    seed = _seed(cfg)
    reports, rows, lines = [], [], []
    for n in ns:
        f = est.pointmass_floor(model, n, c)
        fp = est.params_fingerprint(model, n=n, c=c)
        reports.append(EstimateReport("n_min_pmf", f.n_min_pmf, 0.0, max(f.points, 1), seed, fp, n))
        rows.append({"n": n, "n_min_pmf": f.n_min_pmf, "argmin": f.argmin, "points": f.points})
        lines.append(f"n={n} n*min pmf={f.n_min_pmf:.6g} at {f.argmin}")
    vals = [r["n_min_pmf"] for r in rows]
    ratio = max(vals) / min(vals) if min(vals) > 0 else math.inf
    lines.append(f"max/min across n = {ratio:.3f}")
    _emit("floor", cfg, _experiment_config("floor", cfg, model), seed, reports, {"rows": rows, "ratio": ratio}, lines)
    return EXIT_OK


COMMANDS = {
    "score": cmd_score,
    "gen": cmd_gen,
    "stats": cmd_stats,
    "transform": cmd_transform,
    "oracle": cmd_oracle,
    "variance-scan": cmd_variance_scan,
    "verify-a1": cmd_verify_a1,
    "verify-a2": cmd_verify_a2,
    "profile": cmd_profile,
    "cond-var": cmd_cond_var,
    "coverage": cmd_coverage,
    "floor": cmd_floor,
    "gamma": cmd_gamma,
}


# -- parser --------------------------------------------------------------------------------

def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=("iid", "block"))
    g.add_argument("--l", type=int, help="central block length (block model)")
    g.add_argument("--q1", type=float)
    g.add_argument("--q2", type=float)
    g.add_argument("--q3", type=float)
    g.add_argument("--alphabet", help="symbols, e.g. 'abc' or 'x,y,z'")
    g.add_argument("--probs", help="comma-separated symbol probabilities (i.i.d. model)")
    g.add_argument("--swap", help="the two letters a,b of the letter swap (i.i.d. model)")


def _add_run_flags(p: argparse.ArgumentParser, n_list: bool = False) -> None:
    p.add_argument("--n", help="comma-separated lengths" if n_list else "sequence length",
                   type=str if n_list else int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--scheme", help="JSON/YAML file with score_table and gap_price")
    p.add_argument("--out", help="output path stem; writes <out>.csv and <out>.json")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqfluct", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON or YAML config; flags override it")
        return p

    p = add("score", "optimal alignment score of two strings")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--alphabet")
    p.add_argument("--scheme")

    p = add("gen", "sample sequence pairs")
    _add_model_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int, default=1)

    p = add("stats", "block statistics of a sequence (reads stdin without --x)")
    _add_model_flags(p)
    p.add_argument("--x")

    p = add("transform", "apply a transformation once and report the exact gain")
    p.add_argument("--kind", choices=("swap", "block"), required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--l", type=int)
    p.add_argument("--alphabet")
    p.add_argument("--swap")
    p.add_argument("--scheme")
    p.add_argument("--seed", type=int)

    p = add("oracle", "exhaustive small-n checks")
    p.add_argument("--check", choices=("tilde2", "tilde", "pmf", "deco", "fiber"))
    _add_model_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--scheme")
    p.add_argument("--out")

    for name, help_text, n_list in (
        ("variance-scan", "Var L_n across n", True),
        ("gamma", "E L_n / n across n", True),
        ("verify-a1", "fraction of z with conditional gain >= eps0", False),
        ("verify-a2", "minimum single-application gain (hard bound)", False),
        ("profile", "binned l(u,v) and its gaps", False),
        ("cond-var", "conditional variance of U on the typical window", False),
        ("coverage", "typical-set coverage", False),
        ("floor", "n * minimal point mass over the typical windows", True),
    ):
        p = add(name, help_text)
        _add_model_flags(p)
        _add_run_flags(p, n_list)
        if name in ("profile", "cond-var", "coverage", "floor"):
            p.add_argument("--c", type=float, help="typical-window constant (default: pilot run; floor: 1)")
        if name == "verify-a1":
            p.add_argument("--eps0", type=float)
        if name == "profile":
            p.add_argument("--inner", choices=("exact", "single"))
            p.add_argument("--min-hits", dest="min_hits", type=int)

    p = sub.add_parser("run", help="run the command named in a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    return parser


def _error(kind: str, exc: Exception, code: int) -> int:
    record = {"error": kind, "message": str(exc), "key": getattr(exc, "key", None), "exit_code": code}
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            base = read_config(args.config)
            command = base.get("command")
            if command not in COMMANDS or command == "run":
                raise ValidationError(f"unknown command {command!r}", key="command")
            args = _namespace_from_config(parser, command, args)
        cfg = merged_config(args)
        return COMMANDS[args.command](args, cfg)
    except InvariantViolation as exc:
        return _error("invariant_violation", exc, EXIT_INVARIANT)
    except ResourceGuardError as exc:
        return _error("resource_guard", exc, EXIT_GUARD)
    except (ValidationError, TransformInapplicableError) as exc:
        return _error("validation", exc, EXIT_VALIDATION)
    except (OSError, json.JSONDecodeError) as exc:
        return _error("validation", exc, EXIT_VALIDATION)


def _namespace_from_config(parser: argparse.ArgumentParser, command: str, run_args) -> argparse.Namespace:
    """Namespace for ``command`` with defaults only; the config supplies the values."""
    argv = [command, "--config", run_args.config]
    if command in ("score", "transform"):
        cfg = read_config(run_args.config)
        for key in ("x", "y"):
            if key not in cfg:
                raise ValidationError("missing key", key=key)
            argv += [f"--{key}", str(cfg[key])]
        if command == "transform":
            argv += ["--kind", str(cfg.get("kind", "block"))]
    ns = parser.parse_args(argv)
    for key in ("out", "workers", "seed"):
        if getattr(run_args, key, None) is not None:
            setattr(ns, key, getattr(run_args, key))
    return ns


if __name__ == "__main__":
    sys.exit(main())
