"""Bounds on the expected generalization gap.

Everything here is driven by a dependency quantity the caller supplies:
a mutual information, a conditional variant, a Wasserstein or total
variation distance between posterior and prior, or a trace-level
accumulation for noisy iterative training.  No estimation happens in
this module; the oracles produce these inputs for the worked examples.

Compared to the in-probability bounds, the confidence bookkeeping
drops out and rates are driven by dependency/n alone.  Losses are taken
in [0, 1] for the fast-rate and kl-inversion forms, while the gap forms
carry an explicit range or Lipschitz factor.
"""

import math
import warnings
from dataclasses import dataclass

from .cgf import psi_star_inverse
from .measures import tv_from_kl
from .pb_bounded import _fast_rate_opt, _kappa, kl_inverse_upper
from .pb_unbounded import _kappas, _optimize_gamma_c


@dataclass(frozen=True)
class DependencyVector:
    """Per-index dependency values with a note on what they measure.

    values: non-negative reals, one per sample index (+inf allowed, for
        divergences that may blow up).
    semantics: free-form tag such as "mi", "cmi", "kl", purely for
        bookkeeping in configs and output tables.
    """

    values: tuple
    semantics: str = ""

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        for v in vals:
            if math.isnan(v) or v < 0.0:
                raise ValueError("dependency values must be >= 0")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class LipschitzGeom:
    """Loss Lipschitz constant and hypothesis-space diameter."""

    L: float
    B: float

    def __post_init__(self):
        if not self.L > 0.0 or not self.B > 0.0:
            raise ValueError("L and B must be positive")


def mi_gap_bound(mi, n, env):
    """Gap bound psi_*^{-1}(I/n) for a loss with the given CGF envelope."""
    if mi < 0.0:
        raise ValueError("mutual information must be >= 0")
    return psi_star_inverse(env, mi / n)


def expected_fast_rate(mi, n, emp, gamma, c):
    """Fast-rate form at fixed (gamma, c) for losses in [0, 1]."""
    if not gamma > 1.0:
        raise ValueError("gamma must be > 1")
    if not 0.0 < c <= 1.0:
        raise ValueError("c must be in (0, 1]")
    k1, k2, k3 = _kappas(gamma, c)
    return k1 * emp + k2 * mi / n + k3


def expected_fast_rate_optimal(mi, n, emp):
    """Fast-rate form minimized over (gamma, c).

    Coincides with expected_kl_inverse; kept callable so the equivalence
    is checkable rather than assumed.
    """
    value, _, _ = _fast_rate_opt(mi / n, emp, 1.0)
    return value


def expected_kl_inverse(mi, n, emp):
    """Upper kl-inversion of the empirical risk at budget I/n."""
    return kl_inverse_upper(emp, mi / n)


def expected_mixed_rate(mi, n, emp):
    """emp + I/n + sqrt(2 emp I/n): the explicit interpolating relaxation."""
    cn = mi / n
    return emp + cn + math.sqrt(2.0 * emp * cn)


def expected_moment(mi, n, mom, truncated_emp, gamma=None, c=None):
    """Truncated bound under a p-th moment assumption, expectation level.

    truncated_emp maps a threshold t to the empirical risk of the loss
    truncated at t.  (gamma, c) are optimized when omitted; passing both
    pins them, which the worked examples use.
    """
    if (gamma is None) != (c is None):
        raise ValueError("pass both gamma and c or neither")
    p, m_p = mom.p, mom.m_p
    cn = mi / n

    def value_at(g, cc):
        k1, k2, k3 = _kappas(g, cc)
        base = k2 * cn + k3
        t_star = m_p ** (1.0 / p) * base ** (-1.0 / p)
        tail = m_p ** (1.0 / p) * (p / (p - 1.0)) * base ** ((p - 1.0) / p)
        return k1 * truncated_emp(t_star) + tail, t_star

    if gamma is None:
        gamma, c, _ = _optimize_gamma_c(lambda g, cc: value_at(g, cc)[0])
    value, _ = value_at(gamma, c)
    return value


def expected_variance(mi, n, emp, sigma2, gamma=None, c=None):
    """Variance-regime bound at the expectation level.

    Returns +inf when the self-bounding prefactor 1 - 2 sqrt(kappa2 I/n
    + kappa3) is not positive, i.e. the bound is vacuous at every scale.
    """
    if (gamma is None) != (c is None):
        raise ValueError("pass both gamma and c or neither")
    cn = mi / n
    sigma = math.sqrt(sigma2)

    def value_at(g, cc):
        k1, k2, k3 = _kappas(g, cc)
        root = math.sqrt(k2 * cn + k3)
        denom = 1.0 - 2.0 * root
        if denom <= 0.0:
            return math.inf
        return (k1 * emp + 2.0 * sigma * root) / denom

    if gamma is None:
        _, _, best = _optimize_gamma_c(value_at)
        return best
    return value_at(gamma, c)


def cmi_gap_bound(cmi, n, range_b):
    """Conditional-information gap bound range * sqrt(2 I_cond / n).

    The conditional information of one supersample index never exceeds
    ln 2, so cmi > n ln 2 signals an inconsistent input; that is
    surfaced as a warning, not clamped, since slack upstream estimators
    can overshoot.
    """
    if cmi < 0.0:
        raise ValueError("conditional information must be >= 0")
    if cmi > n * math.log(2.0) * (1.0 + 1e-12):
        warnings.warn("cmi exceeds n ln 2, which no supersample "
                      "construction can produce", RuntimeWarning,
                      stacklevel=2)
    return range_b * math.sqrt(2.0 * cmi / n)


def ecmi_gap_bound(ecmi, n, geom):
    """Evaluated-CMI gap bound L*B*sqrt(8 I_eval / n)."""
    if ecmi < 0.0:
        raise ValueError("evaluated conditional information must be >= 0")
    return geom.L * geom.B * math.sqrt(8.0 * ecmi / n)


def cmi_comparison_applicable(cmi, mi):
    """Whether the disintegrated route is the provably tighter one.

    True when 3 * cmi <= mi.  Diagnostic only: both routes stay valid
    either way, this just reports which side of the comparison holds.
    """
    return 3.0 * cmi <= mi


def _values(dep):
    if isinstance(dep, DependencyVector):
        return dep.values
    vals = tuple(float(v) for v in dep)
    for v in vals:
        if math.isnan(v) or v < 0.0:
            raise ValueError("dependency values must be >= 0")
    return vals


def aggregate_single_letter(dep, n, mode, env):
    """Combine per-index dependencies into a single gap bound.

    sqrt_each inverts the envelope conjugate per index and averages;
    mean_then_invert averages first.  Concavity of the inverse makes
    sqrt_each the tighter of the two.
    """
    values = _values(dep)
    if len(values) != n:
        raise ValueError("need exactly one dependency value per index")
    if mode == "sqrt_each":
        return math.fsum(psi_star_inverse(env, v) for v in values) / n
    if mode == "mean_then_invert":
        return psi_star_inverse(env, math.fsum(values) / n)
    raise ValueError(f"unknown aggregation mode: {mode!r}")


def wasserstein_gap_bound(w_terms, geom, variant):
    """Lipschitz transport bound from Wasserstein terms.

    full expects the single distance between the posterior and the
    prior; single_letter and random_subset average per-index terms;
    rs_setting is the two-sided supersample variant and carries a
    factor 2.
    """
    terms = _values(w_terms)
    if not terms:
        raise ValueError("need at least one transport term")
    if variant == "full":
        if len(terms) != 1:
            raise ValueError("full variant takes a single distance")
        return geom.L * terms[0]
    if variant in ("single_letter", "random_subset"):
        return geom.L * math.fsum(terms) / len(terms)
    if variant == "rs_setting":
        return 2.0 * geom.L * math.fsum(terms) / len(terms)
    raise ValueError(f"unknown variant: {variant!r}")


def tv_gap_bound(terms, geom, input_kind):
    """Total-variation gap bound L*B * mean(tv_i).

    input_kind "tv" takes total variations directly (capped at 1);
    "kl" routes each term through the sharpened Pinsker combination
    first, so infinite divergences still give the trivial L*B cap.
    """
    vals = _values(terms)
    if not vals:
        raise ValueError("need at least one term")
    if input_kind == "kl":
        tvs = [tv_from_kl(t) for t in vals]
    elif input_kind == "tv":
        tvs = [min(t, 1.0) for t in vals]
    else:
        raise ValueError(f"unknown input kind: {input_kind!r}")
    return geom.L * geom.B * math.fsum(tvs) / len(tvs)


def sgld_pensia(steps, d, L):
    """Information accumulated by clipped noisy gradient descent.

    steps: iterable of (step size, noise variance) pairs.  Each step
    contributes (d/2) ln(1 + eta^2 L^2 / (d sigma^2)); the Gaussian
    channel capacity per iterate.
    """
    total = 0.0
    for eta, sigma2 in steps:
        if not sigma2 > 0.0:
            raise ValueError("noise variance must be positive")
        total += 0.5 * d * math.log1p(eta * eta * L * L / (d * sigma2))
    return total


def sgld_incoherence(steps, batch, range_b):
    """Gradient-incoherence route for the same iterate family.

    steps: iterable of (step size, noise variance, squared incoherence)
    triples.  The bound is (range / (sqrt(2) batch)) * sqrt(sum of
    (eta^2/sigma^2) * incoherence^2), which vanishes when minibatch
    gradients agree with the full-sample ones.
    """
    acc = 0.0
    for eta, sigma2, inc2 in steps:
        if not sigma2 > 0.0:
            raise ValueError("noise variance must be positive")
        if inc2 < 0.0:
            raise ValueError("squared incoherence must be >= 0")
        acc += eta * eta / sigma2 * inc2
    return range_b / (math.sqrt(2.0) * batch) * math.sqrt(acc)
