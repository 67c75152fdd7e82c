"""PAC-Bayes bounds without a bounded loss range.

The route here is always the same: control the loss through a CGF
envelope, a raw moment, or a variance, then pay for the free parameter
with an event-space union (the cutoff and open schemes).  The generic
engine behind that pricing is exposed as ``event_space_optimize`` so the
closed forms can be cross-checked against it.
"""

import math
from dataclasses import dataclass

from .cgf import _golden_min, psi, psi_star_inverse
from .pb_bounded import _kappa, _result, xi_factor

__all__ = [
    "EssSupCap",
    "MomentAssumption",
    "banerjee",
    "bounded_variance_bound",
    "chernoff_analogue_cutoff",
    "chernoff_analogue_open",
    "chi2_variance_baselines",
    "event_space_optimize",
    "martingale_second_moment",
    "truncation_moment_bound",
    "variance_chi2_relaxation",
    "variance_figure_curves",
    "xi_prime",
]

# kappa_1 at the variance theorem's fixed parameters c = 1, gamma = e/(e-1)
VARIANCE_KAPPA = math.e / (math.e - 1.0)


@dataclass(frozen=True)
class MomentAssumption:
    """Raw p-th moment control: E[loss^p] <= m_p with p > 1."""

    p: float
    m_p: float

    def __post_init__(self):
        if not self.p > 1.0:
            raise ValueError(f"moment order p must exceed 1, got {self.p!r}")
        if not self.m_p > 0.0:
            raise ValueError(f"m_p must be positive, got {self.m_p!r}")


@dataclass(frozen=True)
class EssSupCap:
    """Essential-supremum fallback for the uninteresting event branch."""

    cap: float = math.inf

    def __post_init__(self):
        if not self.cap > 0.0:
            raise ValueError(f"cap must be positive, got {self.cap!r}")


def banerjee(ctx, env, lam):
    """Single-lambda gap bound (1/lam)((dep + ln(1/beta))/n + psi(lam))."""
    value = psi(env, lam)  # validates the domain
    return (ctx.dependency + math.log(1.0 / ctx.beta)) / (lam * ctx.n) \
        + value / lam


def chernoff_analogue_cutoff(ctx, env, cap=EssSupCap(), union_mode="linear"):
    """Gap bound with the lambda union priced over the cutoff event
    D <= n; outside that event the caller's essential-sup cap applies.

    ``linear`` charges ln(en/beta); ``geometric`` charges
    e max(dep, 1) + ln((2 + ln n)/beta), worthwhile only when the
    dependency grows slower than logarithmically.
    """
    n = ctx.n
    if ctx.dependency > n:
        return _result(ctx, cap.cap, {}, "esssup")
    if union_mode == "linear":
        budget = (ctx.dependency + math.log(math.e * n / ctx.beta)) / n
    elif union_mode == "geometric":
        budget = (math.e * max(ctx.dependency, 1.0)
                  + math.log((2.0 + math.log(n)) / ctx.beta)) / n
    else:
        raise ValueError(f"unknown union mode {union_mode!r}")
    value = psi_star_inverse(env, budget)
    return _result(ctx, value, {"budget": budget}, union_mode)


def chernoff_analogue_open(ctx, env):
    """Gap bound with no cutoff: the dependency pays for its own bucket.

    value is the exact form; params carry the linearized corollary
    (1.1 dep + ln(10 e pi^2 / beta), the a = 19 envelope), which can
    never fall below it.
    """
    dep, n = ctx.dependency, ctx.n
    exact_budget = (dep + math.log(
        math.e * math.pi * math.pi * (dep + 1.0) ** 2 / (6.0 * ctx.beta))) / n
    cor_budget = (1.1 * dep + math.log(
        10.0 * math.e * math.pi * math.pi / ctx.beta)) / n
    exact = psi_star_inverse(env, exact_budget)
    corollary = psi_star_inverse(env, cor_budget)
    return _result(ctx, exact,
                   {"corollary": corollary, "budget": exact_budget}, "open")


def event_space_optimize(per_bucket_bound, n_buckets, beta, mode, dep):
    """Price a free parameter by splitting the event space into buckets.

    ``per_bucket_bound(k, beta_k)`` is the statement holding on bucket k
    at confidence beta_k; the realized bucket coordinate is dep + 1.
    ``cutoff`` mode spreads beta uniformly over n_buckets buckets and
    gives up (returns inf) beyond them; ``open`` mode uses the summable
    schedule beta_k = 6 beta / (pi^2 k^2) and covers every k.

    The bucket count may be fractional: some instantiations charge
    non-integer union sizes like n ln(en).
    """
    if not n_buckets > 0.0:
        raise ValueError(f"n_buckets must be positive, got {n_buckets!r}")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0,1), got {beta!r}")
    if mode not in ("cutoff", "open"):
        raise ValueError(f"unknown mode {mode!r}")
    if math.isnan(dep) or dep < 0.0:
        raise ValueError(f"dep must be >= 0, got {dep!r}")

    k_eff = dep + 1.0
    # probe the caller's statement for monotonicity: looser confidence
    # must not tighten it, and a larger bucket must not shrink it
    probes_b = [beta * 0.25, beta * 0.5, beta]
    vals = [per_bucket_bound(k_eff, b) for b in probes_b]
    if not all(hi >= lo - 1e-12 for hi, lo in zip(vals, vals[1:])):
        raise ValueError("per_bucket_bound is not monotone in confidence")
    vals = [per_bucket_bound(k, beta) for k in (k_eff, k_eff + 1.0)]
    if vals[1] < vals[0] - 1e-12:
        raise ValueError("per_bucket_bound is not monotone in the bucket")

    if mode == "cutoff":
        if dep > n_buckets:
            return math.inf
        return per_bucket_bound(k_eff, beta / n_buckets)
    beta_k = 6.0 * beta / (math.pi * math.pi * k_eff * k_eff)
    return per_bucket_bound(k_eff, beta_k)


def _optimize_gamma_c(objective):
    """Coordinate descent for inf over gamma > 1, c in (0, 1].

    Works in u = ln(gamma - 1) and v = ln c; each axis gets a coarse scan
    plus golden-section refinement.  Ties break toward smaller gamma.
    Any slack only errs upward, which is safe for an upper bound.
    """
    u_lo, u_hi = -14.0, 8.0
    v_lo, v_hi = -18.0, 0.0

    def scan(fn, lo, hi, points=48):
        step = (hi - lo) / (points - 1)
        best_i, best_v = 0, math.inf
        for i in range(points):
            val = fn(lo + i * step)
            if val < best_v:
                best_i, best_v = i, val
        a = lo + max(best_i - 1, 0) * step
        b = lo + min(best_i + 1, points - 1) * step
        x, refined = _golden_min(fn, a, b, width=1e-12)
        if refined < best_v:
            return x, refined
        return lo + best_i * step, best_v

    u, v = 0.0, 0.0
    best = objective(1.0 + math.exp(u), math.exp(v))
    for _ in range(6):
        u, _ = scan(lambda uu: objective(1.0 + math.exp(uu), math.exp(v)),
                    u_lo, u_hi)
        v, val = scan(lambda vv: objective(1.0 + math.exp(u), math.exp(vv)),
                      v_lo, v_hi)
        if best - val <= 1e-14 * max(1.0, abs(best)):
            best = min(best, val)
            break
        best = val
    return 1.0 + math.exp(u), math.exp(v), best


def _kappas(gamma, c):
    k1 = c * gamma * math.log(gamma / (gamma - 1.0))
    k2 = c * gamma
    k3 = gamma * _kappa(c)
    return k1, k2, k3


def truncation_moment_bound(ctx, mom, truncated_emp, variant,
                            gamma=None, c=None, lam=None,
                            xi_mode="conservative"):
    """Risk bound for a loss with a bounded p-th moment, via truncation.

    ``truncated_emp(t)`` must return the empirical mean of the loss
    censored at threshold t.  Variants:

    * ``adaptive``: data-independent threshold t* from the moment and the
      open-mode complexity C'' = (1.1 dep + ln(10 e pi^2 xi/beta))/n
    * ``fixed_lambda``: lambda = (n^(p-1)/m_p)^(1/p), threshold (m_p n)^(1/p)
    * ``simultaneous``: holds for every lambda at once; lam is free (pass
      one or let the routine search)

    (gamma, c) are optimized unless both are supplied.
    """
    if variant not in ("adaptive", "fixed_lambda", "simultaneous"):
        raise ValueError(f"unknown variant {variant!r}")
    p, m_p = mom.p, mom.m_p
    n, dep, beta = ctx.n, ctx.dependency, ctx.beta
    xi = xi_factor(n, xi_mode)

    if variant == "adaptive":
        cpp = (1.1 * dep + math.log(
            10.0 * math.e * math.pi * math.pi * xi / beta)) / n

        def value_at(g, cc):
            k1, k2, k3 = _kappas(g, cc)
            base = k2 * cpp + k3
            t_star = m_p ** (1.0 / p) * base ** (-1.0 / p)
            return (k1 * truncated_emp(t_star)
                    + m_p ** (1.0 / p) * (p / (p - 1.0))
                    * base ** ((p - 1.0) / p))

        def params_at(g, cc):
            k2, k3 = _kappas(g, cc)[1:]
            return m_p ** (1.0 / p) * (k2 * cpp + k3) ** (-1.0 / p)

    elif variant == "fixed_lambda":
        c_budget = dep + math.log(xi / beta)
        threshold = (m_p * n) ** (1.0 / p)

        def value_at(g, cc):
            k1, k2, k3 = _kappas(g, cc)
            return (k1 * truncated_emp(threshold)
                    + (m_p / n ** (p - 1.0)) ** (1.0 / p)
                    * (k2 * c_budget + k3 * n + 1.0 / (p - 1.0)))

        def params_at(g, cc):
            return threshold

    else:
        open_budget = dep + math.log(
            10.0 * math.e * math.pi * math.pi * xi / beta)

        def value_for_lam(g, cc, ll):
            k1, k2, k3 = _kappas(g, cc)
            return (k1 * truncated_emp(n / ll)
                    + k2 * open_budget / ll + k3 * n / ll
                    + (m_p / (p - 1.0)) * (ll / n) ** (p - 1.0))

        if lam is not None:
            if not lam > 0.0:
                raise ValueError(f"lambda must be positive, got {lam!r}")

            def value_at(g, cc):
                return value_for_lam(g, cc, lam)

            def params_at(g, cc):
                return n / lam
        else:
            def value_at(g, cc):
                def over_log_lam(w):
                    return value_for_lam(g, cc, math.exp(w))

                best_v = math.inf
                lo, hi = math.log(1e-6 * n), math.log(1e6 * n)
                step = (hi - lo) / 79.0
                best_i = 0
                for i in range(80):
                    val = over_log_lam(lo + i * step)
                    if val < best_v:
                        best_i, best_v = i, val
                a = lo + max(best_i - 1, 0) * step
                b = lo + min(best_i + 1, 79) * step
                _, refined = _golden_min(over_log_lam, a, b, width=1e-10)
                return min(best_v, refined)

            def params_at(g, cc):
                return math.nan  # threshold varies with the inner lambda

    if (gamma is None) != (c is None):
        raise ValueError("pass both gamma and c or neither")
    if gamma is not None:
        if not gamma > 1.0 or not 0.0 < c <= 1.0:
            raise ValueError("need gamma > 1 and c in (0,1]")
        value = value_at(gamma, c)
    else:
        gamma, c, value = _optimize_gamma_c(value_at)
    t_star = params_at(gamma, c)
    return _result(ctx, value, {"gamma": gamma, "c": c, "t_star": t_star},
                   f"{variant} t*={t_star:.6g}")


def variance_figure_curves(emp, chi2, n, beta, sigma2,
                           xi_mode="conservative"):
    """The four comparison curves at one parameter point, as a dict.

    Scalar-only on purpose (n may be fractional in figure sweeps); the
    regression files pin these expressions digit for digit, so their
    shape must not drift.
    """
    xi = xi_factor(n, xi_mode)
    cp = VARIANCE_KAPPA * (1.1 * math.log1p(chi2)
                           + math.log(10.0 * math.e * math.pi * math.pi
                                      * xi / beta)) / n
    denom = 1.0 - 2.0 * math.sqrt(cp)
    if denom <= 0.0:
        main = math.inf
    else:
        main = (VARIANCE_KAPPA * emp + 2.0 * math.sqrt(sigma2 * cp)) / denom
    return {
        "alquier": emp + math.sqrt(sigma2 * (chi2 + 1.0) / (n * beta)),
        "ohnishi1": emp + math.sqrt(sigma2 * math.sqrt(chi2 + 1.0)
                                    / (n * beta)),
        "ohnishi2": emp + math.sqrt((chi2 + (sigma2 / beta) ** 2)
                                    / (2.0 * n)),
        "main": main,
    }


def bounded_variance_bound(ctx, sigma2, xi_mode="conservative"):
    """Variance-only risk bound (1-2 sqrt(C'))_+^{-1}(k1 emp + 2 sqrt(s2 C')).

    C' = (1.1 dep + ln(10 e pi^2 xi/beta))/n as displayed; the prefactor
    blows up (vacuous) once C' reaches 1/4.
    """
    if not sigma2 > 0.0:
        raise ValueError(f"sigma2 must be positive, got {sigma2!r}")
    cp = (1.1 * ctx.dependency
          + math.log(10.0 * math.e * math.pi * math.pi
                     * xi_factor(ctx.n, xi_mode) / ctx.beta)) / ctx.n
    denom = 1.0 - 2.0 * math.sqrt(cp)
    if denom <= 0.0:
        return _result(ctx, math.inf, {"c_prime": cp}, "prefactor-vacuous")
    value = (VARIANCE_KAPPA * ctx.emp_risk
             + 2.0 * math.sqrt(sigma2 * cp)) / denom
    return _result(ctx, value, {"c_prime": cp}, "variance")


def variance_chi2_relaxation(ctx, sigma2, xi_mode="conservative"):
    """Variance bound with the dependency slot read as a chi-square
    divergence, relaxed through KL <= ln(1 + chi^2).  This is the "main"
    curve of the comparison figure."""
    if not sigma2 > 0.0:
        raise ValueError(f"sigma2 must be positive, got {sigma2!r}")
    curves = variance_figure_curves(ctx.emp_risk, ctx.dependency, ctx.n,
                                    ctx.beta, sigma2, xi_mode)
    regime = "chi2-relaxation" if math.isfinite(curves["main"]) \
        else "prefactor-vacuous"
    return _result(ctx, curves["main"], {}, regime)


def chi2_variance_baselines(ctx, sigma2, xi_mode="conservative"):
    """The three direct chi-square baselines (no relaxation), as a triple."""
    if not sigma2 > 0.0:
        raise ValueError(f"sigma2 must be positive, got {sigma2!r}")
    curves = variance_figure_curves(ctx.emp_risk, ctx.dependency, ctx.n,
                                    ctx.beta, sigma2, xi_mode)
    return curves["alquier"], curves["ohnishi1"], curves["ohnishi2"]


def xi_prime(n):
    """Union factor of the martingale bound: 2 e n (n+1)^2 ln(en)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    return 2.0 * math.e * n * (n + 1.0) ** 2 * math.log(math.e * n)


def martingale_second_moment(ctx, variance_proxy, cap=EssSupCap()):
    """Parameter-free second-moment martingale bound.

    On the event variance_proxy * dep <= n^2 the value is
    (2/sqrt(6)) sqrt((variance_proxy + 1)(dep + ln(xi'(n)/beta)));
    otherwise the caller's cap applies.
    """
    if math.isnan(variance_proxy) or variance_proxy < 0.0:
        raise ValueError(
            f"variance_proxy must be >= 0, got {variance_proxy!r}")
    n = ctx.n
    if variance_proxy * ctx.dependency > float(n) * n:
        return _result(ctx, cap.cap, {}, "esssup")
    value = (2.0 / math.sqrt(6.0)) * math.sqrt(
        (variance_proxy + 1.0)
        * (ctx.dependency + math.log(xi_prime(n) / ctx.beta)))
    return _result(ctx, value, {}, "second-moment")
