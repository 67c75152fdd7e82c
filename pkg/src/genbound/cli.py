"""Config-driven front end: evaluate bounds, sweep parameters, run the
oracles, and emit the CSV/SVG comparison figures.

Commands::

    genbound eval <cfg.toml>
    genbound sweep <cfg.toml>
    genbound figure <name> [--out dir] [--set k=v ...]
    genbound oracle <name> [--seed s] [--set k=v ...]

Everything is deterministic given the config and seed: no timestamps,
fixed grids, 17-significant-digit floats (round-trip exact), and a
config hash in the metadata line, so re-runs are byte-identical.  Exit
codes: 0 success, 2 usage or validation, 3 I/O.
"""

import argparse
import hashlib
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

try:
    import tomllib
except ImportError:  # 3.10 fallback
    import tomli as tomllib

import numpy as np

from . import __version__
from .cgf import CgfEnvelope
from .expected_bounds import (
    DependencyVector,
    LipschitzGeom,
    aggregate_single_letter,
    cmi_gap_bound,
    ecmi_gap_bound,
    expected_fast_rate_optimal,
    expected_kl_inverse,
    expected_mixed_rate,
    mi_gap_bound,
    wasserstein_gap_bound,
)
from .measures import mixture_kl_bounds
from .oracles import (
    GdCounterexampleSpec,
    GlmSpec,
    RngSpec,
    SgldProblem,
    _thread_count,
    gd_counterexample_run,
    glm_exact_gen,
    glm_mc_gen,
    glm_single_letter_mi,
    glm_wasserstein_terms,
    sgld_trace_demo,
    types_enumerate,
)
from .pb_bounded import (
    BoundContext,
    BoundResult,
    catoni,
    catoni_uniform,
    fast_rate,
    fast_rate_optimal,
    kl_inverse_upper,
    mcallester,
    mixed_rate,
    rivasplata,
    seeger_langford,
    thiemann,
)
from .pb_unbounded import (
    bounded_variance_bound,
    martingale_second_moment,
    variance_chi2_relaxation,
    variance_figure_curves,
)
from .privacy_bounds import (
    PrivacyParams,
    dp_cover_bound,
    dp_cover_bound_simplex,
    dp_literature_baselines,
    dp_naive_bounds,
    group_kl,
    maximal_leakage_bound,
    simple_type_bound,
    type_count,
    typical_set_mi_bound,
)

__all__ = ["main"]


# ---------------------------------------------------------------------------
# formatting and config plumbing


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _kv(mapping):
    return ";".join(f"{k}={_fmt(v)}" for k, v in sorted(mapping.items()))


def _hash(text):
    if isinstance(text, str):
        text = text.encode()
    return hashlib.sha256(text).hexdigest()[:12]


def _meta(config_hash):
    return f"# genbound {__version__} config={config_hash}"


def _load_toml(path):
    raw = Path(path).read_bytes()
    return tomllib.loads(raw.decode()), _hash(raw)


def _coerce(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _parse_sets(pairs):
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ValueError(f"--set expects key=value, got {pair!r}")
        out[key] = _coerce(value)
    return out


class _Params:
    """Pop-typed view of an op's parameter table; leftovers are errors."""

    def __init__(self, mapping):
        self.left = dict(mapping)

    def take(self, name, default=..., kind=float):
        if name not in self.left:
            if default is ...:
                raise ValueError(f"missing parameter {name!r}")
            return default
        return kind(self.left.pop(name))

    def has(self, name):
        return name in self.left

    def done(self):
        if self.left:
            names = ", ".join(sorted(self.left))
            raise ValueError(f"unknown parameter(s): {names}")


def _ctx(p):
    return BoundContext(
        n=p.take("n", kind=int),
        beta=p.take("beta"),
        dependency=p.take("dependency"),
        emp_risk=p.take("emp_risk"),
        range_b=p.take("range_b", 1.0),
    )


def _envelope(p):
    kind = p.take("env", "sub_gaussian", str)
    sigma2 = p.take("env_sigma2", 1.0)
    if kind == "sub_gaussian":
        return CgfEnvelope.sub_gaussian(sigma2)
    if kind == "sub_gamma":
        return CgfEnvelope.sub_gamma(sigma2, p.take("env_c"))
    if kind == "sub_exponential":
        return CgfEnvelope.sub_exponential(sigma2, p.take("env_c"))
    raise ValueError(f"unknown envelope kind {kind!r}")


def _priv(p):
    if p.has("eps"):
        return PrivacyParams("pure_dp", p.take("eps"))
    if p.has("mu"):
        return PrivacyParams("gdp", p.take("mu"))
    raise ValueError("privacy ops need eps= (pure DP) or mu= (GDP)")


# ---------------------------------------------------------------------------
# the evaluable operation registry


def _op_seeger(p):
    xi_mode = p.take("xi_mode", "conservative", str)
    return seeger_langford(_ctx(p), xi_mode)


def _op_mcallester(p):
    xi_mode = p.take("xi_mode", "conservative", str)
    return mcallester(_ctx(p), xi_mode)


def _op_catoni(p):
    lam = p.take("lam")
    return catoni(_ctx(p), lam)


def _op_catoni_uniform(p):
    xi_mode = p.take("xi_mode", "conservative", str)
    return catoni_uniform(_ctx(p), xi_mode)


def _op_fast_rate(p):
    gamma = p.take("gamma")
    c = p.take("c")
    xi_mode = p.take("xi_mode", "conservative", str)
    return fast_rate(_ctx(p), gamma, c, xi_mode)


def _op_fast_rate_optimal(p):
    xi_mode = p.take("xi_mode", "conservative", str)
    return fast_rate_optimal(_ctx(p), xi_mode)


def _op_thiemann(p):
    xi_mode = p.take("xi_mode", "conservative", str)
    return thiemann(_ctx(p), xi_mode)


def _op_rivasplata(p):
    xi_mode = p.take("xi_mode", "conservative", str)
    return rivasplata(_ctx(p), xi_mode)


def _op_mixed_rate(p):
    xi_mode = p.take("xi_mode", "conservative", str)
    return mixed_rate(_ctx(p), xi_mode)


def _op_kl_inverse(p):
    return kl_inverse_upper(p.take("r_hat"), p.take("budget"))


def _op_bounded_variance(p):
    sigma2 = p.take("sigma2")
    xi_mode = p.take("xi_mode", "conservative", str)
    return bounded_variance_bound(_ctx(p), sigma2, xi_mode)


def _op_variance_chi2(p):
    sigma2 = p.take("sigma2")
    xi_mode = p.take("xi_mode", "conservative", str)
    return variance_chi2_relaxation(_ctx(p), sigma2, xi_mode)


def _op_martingale(p):
    proxy = p.take("variance_proxy")
    return martingale_second_moment(_ctx(p), proxy)


def _op_mi_gap(p):
    mi = p.take("mi")
    n = p.take("n", kind=int)
    return mi_gap_bound(mi, n, _envelope(p))


def _op_expected_kl(p):
    return expected_kl_inverse(p.take("mi"), p.take("n", kind=int),
                               p.take("emp_risk"))


def _op_expected_fr(p):
    return expected_fast_rate_optimal(p.take("mi"), p.take("n", kind=int),
                                      p.take("emp_risk"))


def _op_expected_mixed(p):
    return expected_mixed_rate(p.take("mi"), p.take("n", kind=int),
                               p.take("emp_risk"))


def _op_cmi_gap(p):
    return cmi_gap_bound(p.take("cmi"), p.take("n", kind=int),
                         p.take("range_b", 1.0))


def _op_ecmi_gap(p):
    geom = LipschitzGeom(p.take("L", 1.0), p.take("B", 1.0))
    return ecmi_gap_bound(p.take("ecmi"), p.take("n", kind=int), geom)


def _op_simple_type(p):
    return simple_type_bound(p.take("z", kind=int), p.take("n"))


def _op_type_count(p):
    return type_count(p.take("z", kind=int), p.take("n", kind=int))


def _op_cover(p):
    priv = _priv(p)
    return dp_cover_bound(priv, p.take("z", kind=int), p.take("n"))


def _op_cover_simplex(p):
    priv = _priv(p)
    return dp_cover_bound_simplex(priv, p.take("z", kind=int), p.take("n"))


def _op_typical(p):
    priv = _priv(p)
    return typical_set_mi_bound(priv, p.take("z", kind=int), p.take("n"))


def _op_group_kl(p):
    priv = _priv(p)
    return group_kl(priv, p.take("k", kind=int))


def _op_leakage(p):
    form = p.take("form", "small_kl", str)
    kwargs = {"xi_mode": p.take("xi_mode", "conservative", str)}
    if form == "chernoff":
        kwargs["env"] = _envelope(p)
    if form == "fast_rate" and p.has("gamma"):
        kwargs["gamma"] = p.take("gamma")
        kwargs["c"] = p.take("c")
    return maximal_leakage_bound(_ctx(p), form, **kwargs)


def _op_dp_naive(p):
    eps = p.take("eps")
    form = p.take("form", "small_kl", str)
    kwargs = {"xi_mode": p.take("xi_mode", "conservative", str)}
    if form == "chernoff":
        kwargs["env"] = _envelope(p)
    if form == "fast_rate" and p.has("gamma"):
        kwargs["gamma"] = p.take("gamma")
        kwargs["c"] = p.take("c")
    ctx = BoundContext(
        n=p.take("n", kind=int),
        beta=p.take("beta"),
        dependency=p.take("dependency", 0.0),
        emp_risk=p.take("emp_risk"),
        range_b=p.take("range_b", 1.0),
    )
    return dp_naive_bounds(eps, ctx, form, **kwargs)


EVAL_OPS = {
    "seeger_langford": _op_seeger,
    "mcallester": _op_mcallester,
    "catoni": _op_catoni,
    "catoni_uniform": _op_catoni_uniform,
    "fast_rate": _op_fast_rate,
    "fast_rate_optimal": _op_fast_rate_optimal,
    "thiemann": _op_thiemann,
    "rivasplata": _op_rivasplata,
    "mixed_rate": _op_mixed_rate,
    "kl_inverse_upper": _op_kl_inverse,
    "bounded_variance_bound": _op_bounded_variance,
    "variance_chi2_relaxation": _op_variance_chi2,
    "martingale_second_moment": _op_martingale,
    "mi_gap_bound": _op_mi_gap,
    "expected_kl_inverse": _op_expected_kl,
    "expected_fast_rate_optimal": _op_expected_fr,
    "expected_mixed_rate": _op_expected_mixed,
    "cmi_gap_bound": _op_cmi_gap,
    "ecmi_gap_bound": _op_ecmi_gap,
    "simple_type_bound": _op_simple_type,
    "type_count": _op_type_count,
    "dp_cover_bound": _op_cover,
    "dp_cover_bound_simplex": _op_cover_simplex,
    "typical_set_mi_bound": _op_typical,
    "group_kl": _op_group_kl,
    "maximal_leakage_bound": _op_leakage,
    "dp_naive_bounds": _op_dp_naive,
}


def _evaluate(target, params):
    try:
        op = EVAL_OPS[target]
    except KeyError:
        raise ValueError(f"unknown operation {target!r}") from None
    p = _Params(params)
    result = op(p)
    p.done()
    if isinstance(result, BoundResult):
        return result
    return BoundResult(value=float(result))


# ---------------------------------------------------------------------------
# eval and sweep


def cmd_eval(config_path):
    cfg, cfg_hash = _load_toml(config_path)
    target = cfg.pop("target", None)
    params = cfg.pop("params", {})
    if cfg:
        raise ValueError(f"unexpected config keys: {sorted(cfg)}")
    if not isinstance(target, str):
        raise ValueError("config needs a string 'target'")
    result = _evaluate(target, params)
    lines = [
        _meta(cfg_hash),
        "op,inputs,value,regime,vacuous,params",
        ",".join([target, _kv(params), _fmt(result.value), result.regime,
                  _fmt(result.vacuous), _kv(result.params)]),
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _sweep_grid(lo, hi, points, scale):
    if scale == "linear":
        return [lo + i * (hi - lo) / (points - 1) for i in range(points)]
    if scale == "log":
        if not lo > 0.0:
            raise ValueError("log sweeps need a positive minimum")
        a, b = math.log10(lo), math.log10(hi)
        return [10.0 ** (a + i * (b - a) / (points - 1))
                for i in range(points)]
    raise ValueError(f"unknown sweep scale {scale!r}")


def cmd_sweep(config_path):
    cfg, cfg_hash = _load_toml(config_path)
    targets = cfg.pop("target", None)
    output = cfg.pop("output", None)
    fixed = cfg.pop("fixed", {})
    sweep = cfg.pop("sweep", None)
    if cfg:
        raise ValueError(f"unexpected config keys: {sorted(cfg)}")
    if isinstance(targets, str):
        targets = [targets]
    if not targets or not all(isinstance(t, str) for t in targets):
        raise ValueError("config needs 'target': an op name or list of them")
    for t in targets:
        if t not in EVAL_OPS:
            raise ValueError(f"unknown operation {t!r}")
    if not isinstance(output, str):
        raise ValueError("config needs an 'output' path")
    if not isinstance(sweep, dict):
        raise ValueError("config needs a [sweep] table")
    param = sweep.pop("param", None)
    lo = sweep.pop("min", None)
    hi = sweep.pop("max", None)
    points = sweep.pop("points", None)
    scale = sweep.pop("scale", "linear")
    if sweep:
        raise ValueError(f"unexpected sweep keys: {sorted(sweep)}")
    if not isinstance(param, str):
        raise ValueError("sweep needs a 'param' name")
    if param in fixed:
        raise ValueError(f"sweep parameter {param!r} also in [fixed]")
    if not isinstance(points, int) or points < 2:
        raise ValueError("sweep needs integer points >= 2")
    if lo is None or hi is None or not float(hi) > float(lo):
        raise ValueError("sweep needs min < max")
    grid = _sweep_grid(float(lo), float(hi), points, scale)

    def at(x):
        cells = []
        for t in targets:
            try:
                cells.append(_evaluate(t, {**fixed, param: x}).value)
            except ValueError:
                cells.append(math.nan)
        return ",".join([_fmt(x)] + [_fmt(v) for v in cells])

    threads = min(_thread_count(), len(grid))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(at, grid))
    else:
        rows = [at(x) for x in grid]

    text = "\n".join([_meta(cfg_hash), ",".join([param] + targets)]
                     + rows) + "\n"
    Path(output).write_text(text)
    return 0


# ---------------------------------------------------------------------------
# figure recipes
#
# Grids shared verbatim with tools/make_golden.py; the regression files
# pin the emitted values digit for digit, so neither side may drift.


def _log_grid(lo, hi, points):
    a = math.log10(lo)
    b = math.log10(hi)
    return [10.0 ** (a + i * (b - a) / (points - 1)) for i in range(points)]


N_GRID = sorted(set(round(10.0 ** (k / 12.0)) for k in range(0, 49)))
EPS_GRID_PB = [10.0 ** (-4.0 + k / 12.0) for k in range(49)]
EPS_GRID_EXP = [10.0 ** (-4.0 + k / 12.0) for k in range(52)] + [2.0]
Z_GRID = sorted(set(round(10.0 ** (k / 12.0)) for k in range(4, 37)))
GLM_N_GRID = sorted(set(round(10.0 ** (k / 12.0)) for k in range(4, 49)))

BETA_GRID = _log_grid(1e-4, 0.5, 49)
CHI_GRID = _log_grid(1.0, 1e5, 49)
NVAR_GRID = _log_grid(10.0, 1e6, 49)
EMP_GRID = [i / 50.0 for i in range(51)]


def _fig_variance(over):
    beta = over.pop("beta", 0.025)
    chi2 = over.pop("chi2", 200.0)
    emp = over.pop("emp", 0.025)
    n = over.pop("n", 1e4)
    sigma2 = over.pop("sigma2", 1.0)

    def values(e, c, nn, b):
        curves = variance_figure_curves(e, c, nn, b, sigma2)
        return [curves["alquier"], curves["ohnishi1"], curves["ohnishi2"],
                curves["main"], e]

    rows = [("caption", 0.0, values(emp, chi2, n, beta))]
    rows += [("beta", b, values(emp, chi2, n, b)) for b in BETA_GRID]
    rows += [("chi2", c, values(emp, c, n, beta)) for c in CHI_GRID]
    rows += [("emp", e, values(e, chi2, n, beta)) for e in EMP_GRID]
    rows += [("n", nn, values(emp, chi2, nn, beta)) for nn in NVAR_GRID]
    header = ["sweep", "x", "alquier", "ohnishi1", "ohnishi2", "main",
              "reference"]
    panels = {"beta": ("confidence level", True), "chi2": ("chi^2", True),
              "emp": ("empirical risk", False), "n": ("sample count", True)}
    return header, rows, panels, {"log_y": True}


def _fig_dp_pacbayes(over):
    z = int(over.pop("z", 100))
    beta = over.pop("beta", 0.05)
    emp = over.pop("emp", 0.05)
    eps = over.pop("eps", 0.1)
    n_eps = int(over.pop("n", 5000))

    def values(e, n):
        priv = PrivacyParams("pure_dp", e)
        deps = [simple_type_bound(z, n),
                dp_cover_bound(priv, z, n).value,
                dp_cover_bound_simplex(priv, z, n).value]
        return [seeger_langford(BoundContext(
            n=n, beta=beta, dependency=dep, emp_risk=emp)).value
            for dep in deps]

    rows = [("n", n, values(eps, n)) for n in N_GRID]
    rows += [("eps", e, values(e, n_eps)) for e in EPS_GRID_PB]
    header = ["panel", "x", "simple", "hypercube", "simplex"]
    panels = {"n": ("sample count", True), "eps": ("privacy eps", True)}
    return header, rows, panels, {"log_y": False, "y_floor": emp}


def _fig_dp_expected(over):
    z = int(over.pop("z", 100))
    emp = over.pop("emp", 0.05)
    eps_fixed = over.pop("eps", 0.6)
    n_fixed = int(over.pop("n", 2500))

    def values(e, n, zz):
        priv = PrivacyParams("pure_dp", e)
        bases = dp_literature_baselines(e, n)
        deps = [simple_type_bound(zz, n),
                dp_cover_bound(priv, zz, n).value,
                dp_cover_bound_simplex(priv, zz, n).value,
                typical_set_mi_bound(priv, zz, n) if n >= 2 else math.nan,
                bases["dwork_mi"],
                bases["bun_mi"]]
        cells = [math.nan if math.isnan(dep)
                 else kl_inverse_upper(emp, dep / n) for dep in deps]
        cells.append(emp + bases["stability_gap"])
        return cells

    rows = [("n", n, values(eps_fixed, n, z)) for n in N_GRID]
    rows += [("eps", e, values(e, n_fixed, z)) for e in EPS_GRID_EXP]
    rows += [("z", zz, values(eps_fixed, n_fixed, zz)) for zz in Z_GRID]
    header = ["panel", "x", "simple", "hypercube", "simplex", "typical",
              "dwork", "bun", "stability"]
    panels = {"n": ("sample count", True), "eps": ("privacy eps", True),
              "z": ("alphabet size", True)}
    return header, rows, panels, {"log_y": False, "y_floor": emp}


def _fig_glm(over):
    sigma2 = over.pop("sigma2", 1.0)
    dims = (int(over.pop("d")),) if "d" in over else (1, 250)
    env = CgfEnvelope.sub_gaussian(sigma2)
    geom = LipschitzGeom(1.0, 1.0)

    def values(d, n):
        spec = GlmSpec(d=d, sigma2=sigma2, n=n)
        per_sample = glm_single_letter_mi(spec)
        mi_bound = aggregate_single_letter(
            DependencyVector((per_sample,) * n), n, "sqrt_each", env)
        return [glm_exact_gen(spec),
                mi_bound,
                wasserstein_gap_bound(
                    (glm_wasserstein_terms(spec, "full"),), geom, "full"),
                wasserstein_gap_bound(
                    (glm_wasserstein_terms(spec, "single_letter"),),
                    geom, "single_letter"),
                wasserstein_gap_bound(
                    (glm_wasserstein_terms(spec, "random_subset"),),
                    geom, "random_subset")]

    rows = [(f"d={d}", n, values(d, n)) for d in dims for n in GLM_N_GRID]
    header = ["panel", "x", "exact", "mi_single_letter", "w2_full",
              "w2_single_letter", "w2_random_subset"]
    panels = {f"d={d}": ("sample count", True) for d in dims}
    return header, rows, panels, {"log_y": True}


FIGURES = {
    "variance_bounds": _fig_variance,
    "dp_pacbayes": _fig_dp_pacbayes,
    "dp_expected": _fig_dp_expected,
    "glm_comparison": _fig_glm,
}


# ---------------------------------------------------------------------------
# native SVG line charts (convenience output; the CSV is the contract)

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf")
_CHART_W, _CHART_H = 720, 300
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 72, 150, 34, 46


def _axis_ticks(lo, hi, log_scale):
    if log_scale:
        first = math.ceil(lo - 1e-9)
        last = math.floor(hi + 1e-9)
        step = max(1, (last - first) // 5 + (0 if (last - first) % 5 == 0
                                             and last > first else 1))
        ticks = list(range(first, last + 1, step)) or [first]
        return [(t, f"1e{t:d}") for t in ticks]
    ticks = [lo + i * (hi - lo) / 4.0 for i in range(5)]
    return [(t, format(t, ".4g")) for t in ticks]


def _svg_panel(title, x_label, series, log_x, log_y, y_floor, y_offset):
    def mapped(v, log_scale):
        return math.log10(v) if log_scale else v

    xs, ys = [], []
    for _, points in series:
        for x, y in points:
            if not math.isfinite(y) or (log_y and y <= 0.0):
                continue
            if log_x and x <= 0.0:
                continue
            xs.append(mapped(x, log_x))
            ys.append(mapped(y, log_y))
    if not xs:
        return "", y_offset
    if y_floor is not None and (not log_y or y_floor > 0.0):
        ys.append(mapped(y_floor, log_y))
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    plot_w = _CHART_W - _MARGIN_L - _MARGIN_R
    plot_h = _CHART_H - _MARGIN_T - _MARGIN_B

    def px(x):
        return _MARGIN_L + plot_w * (mapped(x, log_x) - x_lo) / (x_hi - x_lo)

    def py(y):
        return (y_offset + _MARGIN_T
                + plot_h * (1.0 - (mapped(y, log_y) - y_lo) / (y_hi - y_lo)))

    parts = [
        f'<text x="{_MARGIN_L}" y="{y_offset + 20}" '
        f'font-size="13" font-weight="bold">{title}</text>',
        f'<rect x="{_MARGIN_L}" y="{y_offset + _MARGIN_T}" '
        f'width="{plot_w}" height="{plot_h}" fill="none" '
        f'stroke="#888" stroke-width="1"/>',
    ]
    for tick, label in _axis_ticks(x_lo, x_hi, log_x):
        x = _MARGIN_L + plot_w * (tick - x_lo) / (x_hi - x_lo)
        if not _MARGIN_L - 1 <= x <= _MARGIN_L + plot_w + 1:
            continue
        y_base = y_offset + _MARGIN_T + plot_h
        parts.append(f'<line x1="{x:.2f}" y1="{y_base}" x2="{x:.2f}" '
                     f'y2="{y_base + 4}" stroke="#888"/>')
        parts.append(f'<text x="{x:.2f}" y="{y_base + 17}" font-size="10" '
                     f'text-anchor="middle">{label}</text>')
    for tick, label in _axis_ticks(y_lo, y_hi, log_y):
        y = (y_offset + _MARGIN_T
             + plot_h * (1.0 - (tick - y_lo) / (y_hi - y_lo)))
        if not y_offset + _MARGIN_T - 1 <= y <= y_offset + _MARGIN_T \
                + plot_h + 1:
            continue
        parts.append(f'<line x1="{_MARGIN_L - 4}" y1="{y:.2f}" '
                     f'x2="{_MARGIN_L}" y2="{y:.2f}" stroke="#888"/>')
        parts.append(f'<text x="{_MARGIN_L - 7}" y="{y + 3:.2f}" '
                     f'font-size="10" text-anchor="end">{label}</text>')
    parts.append(
        f'<text x="{_MARGIN_L + plot_w / 2:.0f}" '
        f'y="{y_offset + _CHART_H - 8}" font-size="11" '
        f'text-anchor="middle">{x_label}</text>')
    for idx, (name, points) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        coords = " ".join(
            f"{px(x):.2f},{py(y):.2f}" for x, y in points
            if math.isfinite(y) and (not log_y or y > 0.0)
            and (not log_x or x > 0.0))
        if coords:
            parts.append(f'<polyline points="{coords}" fill="none" '
                         f'stroke="{color}" stroke-width="1.5"/>')
        ly = y_offset + _MARGIN_T + 14 * idx + 8
        lx = _MARGIN_L + plot_w + 10
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 16}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 20}" y="{ly + 3}" '
                     f'font-size="10">{name}</text>')
    return "\n".join(parts), y_offset + _CHART_H


def _svg_figure(name, header, rows, panels, style):
    log_y = style.get("log_y", False)
    y_floor = style.get("y_floor")
    tags = [tag for tag in panels if any(r[0] == tag for r in rows)]
    body = []
    offset = 0
    for tag in tags:
        x_label, log_x = panels[tag]
        series = []
        for col, col_name in enumerate(header[2:]):
            points = [(r[1], r[2][col]) for r in rows if r[0] == tag]
            series.append((col_name, points))
        panel_svg, offset = _svg_panel(f"{name} / {tag}", x_label, series,
                                       log_x, log_y, y_floor, offset)
        if panel_svg:
            body.append(panel_svg)
    height = max(offset, _CHART_H)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{_CHART_W}" height="{height}" '
            f'font-family="sans-serif">\n'
            + "\n".join(body) + "\n</svg>\n")


def cmd_figure(name, out_dir, sets):
    try:
        recipe = FIGURES[name]
    except KeyError:
        raise ValueError(f"unknown figure {name!r}") from None
    over = dict(sets)
    cfg_hash = _hash(name + ";" + _kv(sets))
    header, rows, panels, style = recipe(over)
    if over:
        raise ValueError(f"unknown override(s): {sorted(over)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [_meta(cfg_hash), ",".join(header)]
    for tag, x, cells in rows:
        lines.append(",".join([tag, _fmt(x)] + [_fmt(v) for v in cells]))
    (out / f"{name}.csv").write_text("\n".join(lines) + "\n")
    (out / f"{name}.svg").write_text(
        _svg_figure(name, header, rows, panels, style))
    return 0


# ---------------------------------------------------------------------------
# oracle runs


def _oracle_glm(seed, sets):
    spec = GlmSpec(d=int(sets.pop("d", 1)),
                   sigma2=float(sets.pop("sigma2", 1.0)),
                   n=int(sets.pop("n", 2)))
    replicates = int(sets.pop("replicates", 10_000))
    exact = glm_exact_gen(spec)
    estimate, std_error = glm_mc_gen(spec, replicates, RngSpec(seed=seed))
    fields = {
        "d": spec.d, "sigma2": spec.sigma2, "n": spec.n, "seed": seed,
        "replicates": replicates, "exact": exact, "estimate": estimate,
        "std_error": std_error,
        "within_3se": abs(estimate - exact) <= 3.0 * std_error,
    }
    return fields


def _oracle_gd(seed, sets):
    kwargs = {"n": int(sets.pop("n", 5)), "seed": seed}
    for key in ("d", "T"):
        if key in sets:
            kwargs[key] = int(sets.pop(key))
    if "eta" in sets:
        kwargs["eta"] = float(sets.pop("eta"))
    spec = GdCounterexampleSpec(**kwargs)
    replicates = int(sets.pop("replicates", 10_000))
    report = gd_counterexample_run(spec, replicates)
    fields = {"n": spec.n, "d": spec.d, "T": spec.T, "eta": spec.eta,
              "seed": seed}
    fields.update(report)
    return fields


def _oracle_sgld(seed, sets):
    problem = SgldProblem(
        n=int(sets.pop("n", 16)),
        spread=float(sets.pop("spread", 0.5)),
        curvature=float(sets.pop("curvature", 1.0)),
        clip=float(sets.pop("clip", 1.0)),
        range_b=float(sets.pop("range_b", 1.0)),
        replicates=int(sets.pop("replicates", 64)),
    )
    horizon = int(sets.pop("T", 50))
    eta0 = float(sets.pop("eta0", 0.5))
    steps = [(eta0 / t, eta0 / t) for t in range(1, horizon + 1)]
    report = sgld_trace_demo(problem, steps, RngSpec(seed=seed))
    fields = {"n": problem.n, "T": horizon, "eta0": eta0, "seed": seed}
    fields.update(report)
    return fields


def _oracle_mixture(seed, sets):
    alphabet = int(sets.pop("alphabet", 6))
    components = int(sets.pop("components", 3))
    if alphabet < 2 or components < 1:
        raise ValueError("need alphabet >= 2 and components >= 1")
    gen = np.random.Generator(np.random.Philox(key=seed))

    def simplex_point():
        raw = gen.standard_exponential(alphabet)
        return [float(v) for v in raw / raw.sum()]

    p = simplex_point()
    comps = [simplex_point() for _ in range(components)]
    raw_w = gen.standard_exponential(components)
    weights = [float(v) for v in raw_w / raw_w.sum()]
    exact, lse, min_form = mixture_kl_bounds(p, comps, weights)
    return {"alphabet": alphabet, "components": components, "seed": seed,
            "exact": exact, "log_sum_exp": lse, "min_form": min_form}


def _oracle_types(seed, sets):
    z = int(sets.pop("z", sets.pop("Z", 2)))
    n = int(sets.pop("n", 5))
    return {"z": z, "n": n, "count": types_enumerate(z, n)}


ORACLES = {
    "glm": _oracle_glm,
    "gd-counterexample": _oracle_gd,
    "sgld": _oracle_sgld,
    "mixture-kl": _oracle_mixture,
    "types": _oracle_types,
}


def cmd_oracle(name, seed, sets):
    try:
        runner = ORACLES[name]
    except KeyError:
        raise ValueError(f"unknown oracle {name!r}") from None
    cfg_hash = _hash(f"{name};seed={seed};" + _kv(sets))
    fields = runner(seed, dict(sets))
    lines = [_meta(cfg_hash),
             ",".join(fields),
             ",".join(_fmt(v) for v in fields.values())]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# entry point


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="genbound",
        description="generalization-bound calculator and figure writer")
    sub = parser.add_subparsers(dest="command", required=True)
    p_eval = sub.add_parser("eval", help="evaluate one bound from a config")
    p_eval.add_argument("config")
    p_sweep = sub.add_parser("sweep", help="sweep a parameter to a CSV")
    p_sweep.add_argument("config")
    p_fig = sub.add_parser("figure", help="emit a comparison figure")
    p_fig.add_argument("name")
    p_fig.add_argument("--out", default=".")
    p_fig.add_argument("--set", action="append", default=[], metavar="K=V")
    p_orc = sub.add_parser("oracle", help="run a sampling/enumeration oracle")
    p_orc.add_argument("name")
    p_orc.add_argument("--seed", type=int, default=0)
    p_orc.add_argument("--set", action="append", default=[], metavar="K=V")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            return cmd_eval(args.config)
        if args.command == "sweep":
            return cmd_sweep(args.config)
        if args.command == "figure":
            return cmd_figure(args.name, args.out, _parse_sets(args.set))
        return cmd_oracle(args.name, args.seed, _parse_sets(args.set))
    except ValueError as exc:
        print(f"genbound: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"genbound: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
