"""Risk bounds for losses with a bounded range.

Every operation here consumes the same complexity budget
``C = dependency + ln(xi(n)/beta)`` and differs only in how it trades
``C/n`` against the empirical risk: kl-inversion, a square-root gap,
Catoni's exponential smoothing, or the fast/mixed-rate families.  The
``dependency`` slot is one scalar: posterior-vs-prior relative entropy,
mutual information, or a log Radon-Nikodym value for single-draw use.
"""

import math
from dataclasses import dataclass, field

from .cgf import _golden_min
from .measures import kl_bernoulli

__all__ = [
    "BoundContext",
    "BoundResult",
    "anytime_adjust",
    "catoni",
    "catoni_uniform",
    "fast_rate",
    "fast_rate_optimal",
    "kl_inverse_upper",
    "lambert_w_m1",
    "mcallester",
    "mixed_rate",
    "rivasplata",
    "seeger_langford",
    "thiemann",
    "xi_factor",
]


@dataclass(frozen=True)
class BoundContext:
    """Shared inputs: sample count, confidence, dependency budget, risk.

    ``emp_risk`` lives on the normalized [0, 1] scale; ``range_b`` is the
    loss range and only rescales the terms a theorem says it rescales.
    """

    n: int
    beta: float
    dependency: float
    emp_risk: float
    range_b: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        for name in ("beta", "dependency", "emp_risk", "range_b"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0,1), got {self.beta!r}")
        if math.isnan(self.dependency) or self.dependency < 0.0:
            raise ValueError(
                f"dependency must be >= 0, got {self.dependency!r}")
        if not 0.0 <= self.emp_risk <= 1.0:
            raise ValueError(
                f"emp_risk must lie in [0,1], got {self.emp_risk!r}")
        if not self.range_b > 0.0:
            raise ValueError(
                f"range_b must be positive, got {self.range_b!r}")


@dataclass
class BoundResult:
    value: float
    params: dict = field(default_factory=dict)
    regime: str = ""
    vacuous: bool = False


def _result(ctx, value, params, regime):
    return BoundResult(value=value, params=params, regime=regime,
                       vacuous=value > ctx.range_b)


def xi_factor(n, mode="conservative"):
    """Union-bound factor over the grid of candidate risks.

    ``conservative`` is the wide envelope 2 + sqrt(2n); ``tight`` is
    sqrt(2n + 2), the upper end of the sharper interval.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    if mode == "conservative":
        return 2.0 + math.sqrt(2.0 * n)
    if mode == "tight":
        return math.sqrt(2.0 * n + 2.0)
    raise ValueError(f"unknown xi mode {mode!r}")


def _log_budget(ctx, xi_mode):
    return ctx.dependency + math.log(xi_factor(ctx.n, xi_mode) / ctx.beta)


def kl_inverse_upper(r_hat, budget):
    """Largest r in [r_hat, 1] with kl_bernoulli(r_hat, r) <= budget.

    Fixed 100-iteration bisection with no early exit, so the result is a
    pure function of the inputs down to the last bit; the figure
    regression files depend on that.
    """
    if not 0.0 <= r_hat <= 1.0:
        raise ValueError(f"r_hat must lie in [0,1], got {r_hat!r}")
    if math.isnan(budget) or budget < 0.0:
        raise ValueError(f"budget must be >= 0, got {budget!r}")
    if r_hat == 0.0:
        return -math.expm1(-budget) if budget < math.inf else 1.0
    lo, hi = r_hat, 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if kl_bernoulli(r_hat, mid) <= budget:
            lo = mid
        else:
            hi = mid
    return lo


def seeger_langford(ctx, xi_mode="conservative"):
    """kl-inversion risk bound: the tightest of the bounded-range family."""
    budget = _log_budget(ctx, xi_mode) / ctx.n
    value = kl_inverse_upper(ctx.emp_risk, budget)
    return _result(ctx, value, {"budget": budget}, "small-kl")


def mcallester(ctx, xi_mode="conservative"):
    """Square-root gap bound; value is emp_risk plus the gap."""
    gap = ctx.range_b * math.sqrt(_log_budget(ctx, xi_mode) / (2.0 * ctx.n))
    return _result(ctx, ctx.emp_risk + gap, {"gap": gap}, "sqrt-gap")


def _catoni_value(ctx, lam, c_budget):
    n = ctx.n
    num = -math.expm1(-lam * ctx.emp_risk / n - c_budget / n)
    den = -math.expm1(-lam / n)
    return num / den


def catoni(ctx, lam):
    """Exponential-moment bound at a fixed lambda, plain ln(1/beta) price."""
    if not lam > 0.0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    c_budget = ctx.dependency + math.log(1.0 / ctx.beta)
    value = _catoni_value(ctx, lam, c_budget)
    return _result(ctx, value, {"lambda": lam}, "fixed-lambda")


def catoni_uniform(ctx, xi_mode="conservative"):
    """Catoni form holding uniformly over lambda (xi(n) union price),
    minimized over lambda on a log grid plus golden-section refinement.

    The formula depends on lambda only through lambda/n, so the search
    window [1e-3 n, 1e3 n] keeps that ratio in a fixed range.  At zero
    empirical risk the infimum sits at lambda -> inf with the analytic
    value 1 - exp(-C/n), which is returned directly.
    """
    c_budget = _log_budget(ctx, xi_mode)
    if ctx.emp_risk == 0.0:
        value = -math.expm1(-c_budget / ctx.n)
        return _result(ctx, value, {"lambda": math.inf}, "zero-emp-limit")

    def objective(lam):
        return _catoni_value(ctx, lam, c_budget)

    lo, hi = 1e-3 * ctx.n, 1e3 * ctx.n
    ratio = (hi / lo) ** (1.0 / 599.0)
    grid = []
    x = lo
    best_i, best_v = 0, math.inf
    for i in range(600):
        grid.append(x)
        v = objective(x)
        if v < best_v:
            best_i, best_v = i, v
        x *= ratio
    a = grid[max(best_i - 1, 0)]
    b = grid[min(best_i + 1, 599)]
    lam_star, refined = _golden_min(objective, a, b)
    if refined < best_v:
        best_v = refined
    else:
        lam_star = grid[best_i]
    return _result(ctx, best_v, {"lambda": lam_star}, "optimized-lambda")


def _kappa(c):
    return 1.0 - c * (1.0 - math.log(c))


def fast_rate(ctx, gamma, c, xi_mode="conservative"):
    """Fast-rate form at fixed (gamma, c); the loss range multiplies the
    complexity and bias terms only."""
    if not gamma > 1.0:
        raise ValueError(f"gamma must exceed 1, got {gamma!r}")
    if not 0.0 < c <= 1.0:
        raise ValueError(f"c must lie in (0,1], got {c!r}")
    cn = _log_budget(ctx, xi_mode) / ctx.n
    value = (c * gamma * math.log(gamma / (gamma - 1.0)) * ctx.emp_risk
             + ctx.range_b * c * gamma * cn
             + ctx.range_b * gamma * _kappa(c))
    return _result(ctx, value, {"gamma": gamma, "c": c}, "fixed-parameters")


def lambert_w_m1(x):
    """Lower real branch of w e^w = x, defined on [-1/e, 0).

    Initial guess from the branch-point series near -1/e and the
    log-log asymptote elsewhere, then Newton, following the usual
    two-regime recipe.
    """
    if math.isnan(x) or x >= 0.0 or x < -1.0 / math.e - 1e-15:
        raise ValueError(f"argument must lie in [-1/e, 0), got {x!r}")
    ex1 = 1.0 + math.e * x
    if ex1 <= 1e-16:
        return -1.0
    p = -math.sqrt(2.0 * ex1)
    if p > -0.5:
        w = -1.0 + p - p * p / 3.0 + 11.0 * p ** 3 / 72.0
    else:
        l1 = math.log(-x)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    for _ in range(100):
        ew = math.exp(w)
        d = ew * (1.0 + w)
        if d == 0.0:
            break
        step = (w * ew - x) / d
        w_new = w - step
        if w_new > -1.0:
            w_new = 0.5 * (w - 1.0)
        if abs(w_new - w) <= 1e-12 * max(1.0, abs(w_new)):
            return w_new
        w = w_new
    return w


def _fast_rate_opt(cn, emp, b):
    """Shared core of the fast-rate minimization over (gamma, c).

    gamma has a closed form per c through the lower Lambert branch; c is
    then searched on a log grid over (0, 1] with golden-section
    refinement.  Returns (value, gamma, c).
    """
    if emp == 0.0:
        return b * -math.expm1(-cn), 1.0, math.exp(-cn)
    if cn == 0.0:
        # infimum at c=1 as gamma grows without bound; the empirical
        # coefficient tends to 1 and every other term vanishes
        return emp, math.inf, 1.0

    def gamma_for(c):
        x = b * (c * cn + _kappa(c)) / (c * emp)
        arg = -math.exp(-1.0 - x)
        if arg == 0.0:
            # underflow: W_{-1}(-e^{-1-x}) ~ -1 - x - ln(1+x) for large x
            return 1.0 + 1.0 / (x + math.log1p(x))
        return 1.0 + 1.0 / (-1.0 - lambert_w_m1(arg))

    def value_at(c):
        g = gamma_for(c)
        if g <= 1.0:
            return math.inf
        return (c * g * math.log(g / (g - 1.0)) * emp
                + b * c * g * cn + b * g * _kappa(c))

    best_i, best_v = 0, math.inf
    grid = [10.0 ** (-6.0 + 6.0 * i / 399.0) for i in range(400)]
    for i, c in enumerate(grid):
        v = value_at(c)
        if v < best_v:
            best_i, best_v = i, v
    lo = grid[max(best_i - 1, 0)]
    hi = grid[min(best_i + 1, 399)]
    c_star, refined = _golden_min(value_at, lo, hi, width=1e-12)
    if refined < best_v:
        best_v = refined
    else:
        c_star = grid[best_i]
    return best_v, gamma_for(c_star), c_star


def fast_rate_optimal(ctx, xi_mode="conservative"):
    """Fast-rate bound at the best (gamma, c).

    The optimum matches the kl-inversion bound, which is the equivalence
    the acceptance tests pin down.
    """
    cn = _log_budget(ctx, xi_mode) / ctx.n
    value, gamma, c = _fast_rate_opt(cn, ctx.emp_risk, ctx.range_b)
    regime = "zero-emp-limit" if ctx.emp_risk == 0.0 else "lambert-optimized"
    return _result(ctx, value, {"gamma": gamma, "c": c}, regime)


def thiemann(ctx, xi_mode="conservative"):
    """inf over lambda in (0,2) of emp/(1-lambda/2) + C/(n lambda (1-lambda/2)).

    Both pieces are convex on (0, 2), so a linear grid with golden-section
    refinement lands on the infimum; any residual search slack only errs
    upward, which is the safe direction for an upper bound.
    """
    cn = _log_budget(ctx, xi_mode) / ctx.n

    def objective(lam):
        half = 1.0 - lam / 2.0
        return ctx.emp_risk / half + cn / (lam * half)

    lo, hi = 1e-6, 2.0 - 1e-6
    step = (hi - lo) / 599.0
    best_i, best_v = 0, math.inf
    for i in range(600):
        lam = lo + i * step
        v = objective(lam)
        if v < best_v:
            best_i, best_v = i, v
    a = lo + max(best_i - 1, 0) * step
    b = lo + min(best_i + 1, 599) * step
    lam_star, refined = _golden_min(objective, a, b, width=1e-12)
    if refined < best_v:
        best_v = refined
    else:
        lam_star = lo + best_i * step
    return _result(ctx, best_v, {"lambda": lam_star}, "optimized-lambda")


def rivasplata(ctx, xi_mode="conservative"):
    """Closed-form three-term square-root bound."""
    cn = _log_budget(ctx, xi_mode) / ctx.n
    value = (ctx.emp_risk + cn
             + math.sqrt(2.0 * ctx.emp_risk * cn + cn * cn))
    return _result(ctx, value, {}, "closed-form")


def mixed_rate(ctx, xi_mode="conservative"):
    """emp + C/n + sqrt(2 emp C/n); symmetric in its two ingredients."""
    cn = _log_budget(ctx, xi_mode) / ctx.n
    value = ctx.emp_risk + cn + math.sqrt(2.0 * ctx.emp_risk * cn)
    return _result(ctx, value, {}, "closed-form")


def anytime_adjust(beta, t):
    """Per-step confidence 6 beta / (pi^2 t^2); summing over all t >= 1
    spends exactly beta, so a bound fed the adjusted value at every step
    holds simultaneously for all steps."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0,1), got {beta!r}")
    if t < 1:
        raise ValueError(f"t must be a positive integer, got {t!r}")
    return 6.0 * beta / (math.pi * math.pi * t * t)
