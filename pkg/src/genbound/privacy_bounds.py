"""Generalization guarantees driven by privacy parameters.

Two families live here.  The first substitutes a privacy quantity
(maximal leakage, or n*eps for pure DP) into the confidence-bound
machinery and inherits its rates.  The second is specific to
permutation-invariant algorithms on a finite alphabet: counting
arguments over types give dependency bounds that keep shrinking with n
even at fixed privacy level, via hypercube or simplex covers of the
type lattice and, in expectation, a typical-set refinement.

Counting is done in exact integer arithmetic; floats appear only once a
logarithm is taken.
"""

import math
from dataclasses import dataclass

from .cgf import psi_star_inverse
from .pb_bounded import (
    BoundResult,
    _fast_rate_opt,
    _result,
    fast_rate,
    fast_rate_optimal,
    kl_inverse_upper,
    seeger_langford,
    xi_factor,
)
from .pb_unbounded import _kappas, _optimize_gamma_c

_PRIVACY_KINDS = ("pure_dp", "gdp", "maximal_leakage")


@dataclass(frozen=True)
class PrivacyParams:
    """A single privacy guarantee: its flavor and its strength."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in _PRIVACY_KINDS:
            raise ValueError(f"unknown privacy kind: {self.kind!r}")
        if not self.value > 0.0:
            raise ValueError("privacy parameter must be positive")


@dataclass(frozen=True)
class AlphabetSpec:
    """Cardinality of a finite instance space."""

    Z: int

    def __post_init__(self):
        if int(self.Z) != self.Z or self.Z < 2:
            raise ValueError("alphabet size must be an integer >= 2")
        object.__setattr__(self, "Z", int(self.Z))


def _alphabet_size(alphabet):
    if isinstance(alphabet, AlphabetSpec):
        return alphabet.Z
    return AlphabetSpec(alphabet).Z


def _moment_value(budget, mom, truncated_emp, gamma, c):
    """Truncated moment bound at dependency budget; shared by the
    leakage and naive-DP routes."""
    if (gamma is None) != (c is None):
        raise ValueError("pass both gamma and c or neither")
    p, m_p = mom.p, mom.m_p

    def value_at(g, cc):
        k1, k2, k3 = _kappas(g, cc)
        base = k2 * budget + k3
        t_star = m_p ** (1.0 / p) * base ** (-1.0 / p)
        tail = m_p ** (1.0 / p) * (p / (p - 1.0)) * base ** ((p - 1.0) / p)
        return k1 * truncated_emp(t_star) + tail, t_star

    if gamma is None:
        gamma, c, _ = _optimize_gamma_c(lambda g, cc: value_at(g, cc)[0])
    value, t_star = value_at(gamma, c)
    return value, {"gamma": gamma, "c": c, "t_star": t_star}


def maximal_leakage_bound(ctx, kind, env=None, mom=None, truncated_emp=None,
                          gamma=None, c=None, xi_mode="conservative"):
    """Risk/gap bound for an algorithm whose maximal leakage is bounded.

    The leakage plays exactly the role of the posterior-prior dependency,
    so small_kl and fast_rate delegate to the bounded-loss layer with
    dependency = ctx.dependency.  The CGF kind needs no simultaneity over
    a data-dependent quantity and keeps the plain 1/beta budget.
    """
    if kind == "small_kl":
        return seeger_langford(ctx, xi_mode)
    if kind == "fast_rate":
        if gamma is not None or c is not None:
            return fast_rate(ctx, gamma, c, xi_mode)
        return fast_rate_optimal(ctx, xi_mode)
    if kind == "chernoff":
        if env is None:
            raise ValueError("chernoff kind needs a CGF envelope")
        budget = (ctx.dependency + math.log(1.0 / ctx.beta)) / ctx.n
        value = psi_star_inverse(env, budget)
        return _result(ctx, value, {"budget": budget}, "leakage-chernoff")
    if kind == "moment":
        if mom is None or truncated_emp is None:
            raise ValueError("moment kind needs mom and truncated_emp")
        xi = xi_factor(ctx.n, xi_mode)
        budget = (ctx.dependency + math.log(xi / ctx.beta)) / ctx.n
        value, params = _moment_value(budget, mom, truncated_emp, gamma, c)
        return _result(ctx, value, params, "leakage-moment")
    raise ValueError(f"unknown kind: {kind!r}")


def dp_naive_bounds(eps, ctx, kind, env=None, mom=None, truncated_emp=None,
                    gamma=None, c=None, xi_mode="conservative"):
    """Direct substitution of the a.s. density-ratio cap n*eps.

    The privacy parameter survives outside the 1/n scaling (budget
    eps + log(xi(n)/beta)/n and friends), so nothing here vanishes with
    more data unless eps itself shrinks.  ctx.dependency is ignored; eps
    is taken from the explicit argument.
    """
    if not eps >= 0.0:
        raise ValueError("eps must be >= 0")
    xi = xi_factor(ctx.n, xi_mode)
    budget = eps + math.log(xi / ctx.beta) / ctx.n
    if kind == "small_kl":
        value = kl_inverse_upper(ctx.emp_risk, budget)
        return _result(ctx, value, {"budget": budget}, "naive-dp-kl")
    if kind == "fast_rate":
        b = ctx.range_b
        if gamma is not None or c is not None:
            k1, k2, k3 = _kappas(gamma, c)
            value = k1 * ctx.emp_risk + b * k2 * budget + b * k3
            return _result(ctx, value, {"gamma": gamma, "c": c},
                           "naive-dp-fast")
        value, g_star, c_star = _fast_rate_opt(budget, ctx.emp_risk, b)
        return _result(ctx, value, {"gamma": g_star, "c": c_star},
                       "naive-dp-fast")
    if kind == "chernoff":
        if env is None:
            raise ValueError("chernoff kind needs a CGF envelope")
        cgf_budget = eps + math.log(1.0 / ctx.beta) / ctx.n
        value = psi_star_inverse(env, cgf_budget)
        return _result(ctx, value, {"budget": cgf_budget},
                       "naive-dp-chernoff")
    if kind == "moment":
        if mom is None or truncated_emp is None:
            raise ValueError("moment kind needs mom and truncated_emp")
        value, params = _moment_value(budget, mom, truncated_emp, gamma, c)
        return _result(ctx, value, params, "naive-dp-moment")
    raise ValueError(f"unknown kind: {kind!r}")


def group_kl(priv, k):
    """KL between outputs on training sets differing in k entries.

    pure DP gives the tight hyperbolic-tangent form; GDP composes
    linearly in the Gaussian parameter, so the divergence is quadratic
    in k.
    """
    if int(k) != k or k < 1:
        raise ValueError("group size must be an integer >= 1")
    if priv.kind == "pure_dp":
        ke = k * priv.value
        return ke * math.tanh(ke / 2.0)
    if priv.kind == "gdp":
        return 0.5 * (k * priv.value) ** 2
    raise ValueError("group privacy needs a pure_dp or gdp parameter")


def group_kl_envelope(priv, k):
    """Simpler (looser) cap min{k^2 eps^2 / 2, k eps} on the group KL."""
    if int(k) != k or k < 1:
        raise ValueError("group size must be an integer >= 1")
    if priv.kind == "pure_dp":
        ke = k * priv.value
        return min(0.5 * ke * ke, ke)
    if priv.kind == "gdp":
        return 0.5 * (k * priv.value) ** 2
    raise ValueError("group privacy needs a pure_dp or gdp parameter")


def type_count(alphabet, n):
    """Number of types (empirical distributions) of n samples."""
    z = _alphabet_size(alphabet)
    if int(n) != n or n < 0:
        raise ValueError("n must be a non-negative integer")
    return math.comb(int(n) + z - 1, z - 1)


def simple_type_bound(alphabet, n):
    """KL cap (Z-1) ln(1+n) from the crude count (n+1)^(Z-1)."""
    z = _alphabet_size(alphabet)
    return (z - 1.0) * math.log(1.0 + n)


def simplex_cover_count(k, t):
    """Hypercubes of side 1/t needed to cover the corner below a
    (k-1)-simplex.

    Returns (exact, upper) with the exact count C(t+k-1, k) and the
    closed-form cap (t + (k-1)/2)^k / k!.
    """
    if int(k) != k or k < 1 or int(t) != t or t < 1:
        raise ValueError("k and t must be integers >= 1")
    k, t = int(k), int(t)
    exact = math.comb(t + k - 1, k)
    upper = (t + (k - 1) / 2.0) ** k / math.factorial(k)
    return exact, upper


def _boundary(params, name, value):
    params[name] = value
    return params


def dp_cover_bound(priv, alphabet, n):
    """Dependency cap from a hypercube cover of the type lattice.

    Valid for eps <= 1 (pure DP) or mu <= 1/sqrt(Z-1) (GDP); outside
    those regimes the crude type count is reported instead, flagged by
    the regime string.  The value bounds a KL / mutual information, so
    the vacuous flag stays False.
    """
    z = _alphabet_size(alphabet)
    params = {"Z": z, "n": n}
    simple = simple_type_bound(z, n)
    if priv.kind == "pure_dp":
        eps = priv.value
        if eps <= 1.0:
            value = (z - 1.0) * math.log(1.0 + math.e * eps * n)
            if eps == 1.0:
                _boundary(params, "adjacent_simple", simple)
            return BoundResult(value, params, "hypercube-cover", False)
        return BoundResult(simple, params, "simple-fallback", False)
    if priv.kind == "gdp":
        mu = priv.value
        cap = 1.0 / math.sqrt(z - 1.0)
        if mu <= cap:
            value = 0.5 * (z - 1.0) * math.log(
                1.0 + math.e * (z - 1.0) * mu * mu * n * n)
            if mu == cap:
                _boundary(params, "adjacent_simple", simple)
            return BoundResult(value, params, "hypercube-cover", False)
        return BoundResult(simple, params, "simple-fallback", False)
    raise ValueError("cover bounds need a pure_dp or gdp parameter")


def dp_cover_bound_simplex(priv, alphabet, n):
    """Sharper dependency cap from covering only the type simplex.

    Three regimes per privacy flavor, selected exactly as stated; the
    general-count form doubles as the fallback for weak privacy and is
    valid for any algorithm.  At an exact regime boundary the adjacent
    branch value is recorded in params for reference.
    """
    z = _alphabet_size(alphabet)
    params = {"Z": z, "n": n}
    half_log = 0.5 * math.log(2.0 * math.pi * (z - 1.0))
    general = ((z - 1.0) * math.log(1.0 + n / (z - 1.0))
               + (z - 1.0) - half_log)

    if priv.kind == "pure_dp":
        eps = priv.value

        def mid(e):
            return ((z - 1.0) * math.log(1.0 + 2.0 * e * n / (z - 1.0))
                    + (z - 1.0) * math.log(math.e * math.e / 2.0)
                    - half_log)

        if eps <= 1.0 / n:
            value = (z - 1.0) * (1.0 + eps * n) - half_log
            if eps == 1.0 / n:
                _boundary(params, "adjacent_mid", mid(eps))
            return BoundResult(value, params, "simplex-inner", False)
        if eps <= 1.0:
            if eps == 1.0:
                _boundary(params, "adjacent_general", general)
            return BoundResult(mid(eps), params, "simplex-mid", False)
        return BoundResult(general, params, "general-count", False)

    if priv.kind == "gdp":
        mu = priv.value
        root = math.sqrt(z - 1.0)

        def mid(m):
            return ((z - 1.0) * math.log(1.0 + 2.0 * m * n / root)
                    + (z - 1.0) * math.log(math.e * math.sqrt(math.e) / 2.0)
                    - half_log)

        if mu <= 1.0 / (n * root):
            value = ((z - 1.0) * (1.0 + 0.5 * (z - 1.0) * mu * mu * n * n)
                     - half_log)
            if mu == 1.0 / (n * root):
                _boundary(params, "adjacent_mid", mid(mu))
            return BoundResult(value, params, "simplex-inner", False)
        if mu <= 1.0 / root:
            if mu == 1.0 / root:
                _boundary(params, "adjacent_general", general)
            return BoundResult(mid(mu), params, "simplex-mid", False)
        return BoundResult(general, params, "general-count", False)

    raise ValueError("cover bounds need a pure_dp or gdp parameter")


def typical_set_mi_bound(priv, alphabet, n):
    """Mutual-information cap from covering only the typical types.

    Privacy multiplies sqrt(n log n) instead of n here, at the price of
    holding in expectation only.  Needs n >= 2; at n = 1 the typical-set
    radius sqrt(n log n) degenerates to zero.
    """
    z = _alphabet_size(alphabet)
    if n < 2:
        raise ValueError("typical-set bound needs n >= 2")
    root = math.sqrt(n * math.log(n))
    if priv.kind == "pure_dp":
        eps = priv.value
        if eps <= 2.0:
            return z * math.log(1.0 + math.e * eps * root) + 2.0 * z * eps / n
        return z * math.log(1.0 + 2.0 * root) + 2.0 * z * eps / n
    if priv.kind == "gdp":
        mu = priv.value
        if mu <= 2.0 / math.sqrt(z):
            return (0.5 * z * math.log(1.0 + math.e * z * mu * mu
                                       * n * math.log(n)) + z * mu * mu)
        return z * math.log(1.0 + 2.0 * root) + z * mu * mu
    raise ValueError("typical-set bound needs a pure_dp or gdp parameter")


def dp_literature_baselines(eps, n, l_prime=1.0):
    """Reference pure-DP generalization results from the literature.

    dwork_gap/dwork_confidence: eps*L' holds with probability
    1 - 3exp(-eps^2 n).  dwork_mi and bun_mi are dependency caps
    (n*eps from max-information, n*eps^2/2) meant for the expectation
    bounds.  stability_gap is the uniform-stability route e^eps - 1.
    jung_gap is a callable in the confidence level.
    """
    if not eps >= 0.0:
        raise ValueError("eps must be >= 0")
    return {
        "dwork_gap": eps * l_prime,
        "dwork_confidence": 1.0 - 3.0 * math.exp(-eps * eps * n),
        "dwork_mi": eps * n,
        "bun_mi": 0.5 * n * eps * eps,
        "stability_gap": math.expm1(eps),
        "jung_gap": lambda beta: (math.expm1(eps)
                                  + math.sqrt(2.0 * math.log(2.0 / beta)
                                              / n)),
    }
