"""Divergences and distances on finite alphabets, plus the mixture-KL bounds.

Everything here works in nats. Infinities are returned as ``math.inf`` and
propagated by callers; nothing is clamped except where a statement itself
caps a quantity (``tv_from_kl`` never exceeds 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "GaussianDiag",
    "chi2_discrete",
    "kl_bernoulli",
    "kl_discrete",
    "mixture_kl_bounds",
    "renyi_inf_discrete",
    "tv_discrete",
    "tv_from_kl",
    "wasserstein2_gaussian",
]

_SUM_TOL = 1e-9


def _check_dist(p, name):
    """Validate a probability vector. Refuses to renormalize."""
    if len(p) < 1:
        raise ValueError(f"{name}: empty probability vector")
    for x in p:
        if x < 0.0 or math.isnan(x):
            raise ValueError(f"{name}: negative or NaN mass {x!r}")
    total = math.fsum(p)
    if abs(total - 1.0) > _SUM_TOL:
        raise ValueError(
            f"{name}: masses sum to {total!r}, not 1 (renormalize explicitly "
            "if that is what you want)")
    return p


def _check_pair(p, q):
    _check_dist(p, "p")
    _check_dist(q, "q")
    if len(p) != len(q):
        raise ValueError(f"alphabet mismatch: {len(p)} vs {len(q)}")


def kl_discrete(p, q):
    """Relative entropy sum(p_i * ln(p_i / q_i)) in nats.

    Terms with p_i = 0 contribute nothing. If some p_i > 0 sits where
    q_i = 0 the divergence is infinite and ``math.inf`` is returned.
    """
    _check_pair(p, q)
    total = 0.0
    for pi, qi in zip(p, q):
        if pi == 0.0:
            continue
        if qi == 0.0:
            return math.inf
        total += pi * math.log(pi / qi)
    # analytically >= 0; guard the last few ulps on near-identical inputs
    return total if total > 0.0 else 0.0


def kl_bernoulli(r_hat, r):
    """Binary relative entropy kl(r_hat || r) between Bernoulli parameters."""
    if not 0.0 <= r_hat <= 1.0 or not 0.0 <= r <= 1.0:
        raise ValueError(f"kl_bernoulli needs values in [0,1], got "
                         f"({r_hat!r}, {r!r})")
    if r_hat == r:
        return 0.0
    if r <= 0.0 or r >= 1.0:
        return math.inf
    s = 0.0
    if r_hat > 0.0:
        s += r_hat * math.log(r_hat / r)
    if r_hat < 1.0:
        s += (1.0 - r_hat) * math.log((1.0 - r_hat) / (1.0 - r))
    return s if s > 0.0 else 0.0


def tv_discrete(p, q):
    """Total variation distance, one half the L1 distance."""
    _check_pair(p, q)
    return 0.5 * math.fsum(abs(pi - qi) for pi, qi in zip(p, q))


def chi2_discrete(p, q):
    """Chi-square divergence sum((p_i - q_i)^2 / q_i); inf if p !<< q."""
    _check_pair(p, q)
    total = 0.0
    for pi, qi in zip(p, q):
        if qi == 0.0:
            if pi > 0.0:
                return math.inf
            continue
        total += (pi - qi) ** 2 / qi
    return total


def renyi_inf_discrete(p, q):
    """Renyi divergence of order infinity, ln(max_i p_i / q_i)."""
    _check_pair(p, q)
    worst = 0.0
    for pi, qi in zip(p, q):
        if pi == 0.0:
            continue
        if qi == 0.0:
            return math.inf
        ratio = pi / qi
        if ratio > worst:
            worst = ratio
    out = math.log(worst)
    return out if out > 0.0 else 0.0


def tv_from_kl(kl):
    """Best of the Pinsker and Bretagnolle-Huber total-variation bounds.

    Returns min(sqrt(kl/2), sqrt(1 - exp(-kl)), 1). The second branch is
    evaluated through expm1 so small divergences keep full precision, and
    an infinite divergence gives exactly 1.
    """
    if math.isnan(kl) or kl < 0.0:
        raise ValueError(f"divergence must be >= 0, got {kl!r}")
    pinsker = math.sqrt(0.5 * kl)
    bh = math.sqrt(-math.expm1(-kl))
    return min(pinsker, bh, 1.0)


@dataclass(frozen=True)
class GaussianDiag:
    """Gaussian with diagonal covariance; ``variance`` is a scalar for the
    isotropic case or one positive entry per coordinate."""

    mean: tuple
    variance: object = 1.0

    def __post_init__(self):
        mean = tuple(float(x) for x in self.mean)
        if len(mean) < 1:
            raise ValueError("mean must have at least one coordinate")
        try:
            var = tuple(float(v) for v in self.variance)
        except TypeError:
            var = (float(self.variance),) * len(mean)
        if len(var) != len(mean):
            raise ValueError("variance length does not match dimension")
        for v in var:
            if not v > 0.0:
                raise ValueError(f"variance must be positive, got {v!r}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variance", var)

    @property
    def dim(self):
        return len(self.mean)

    @property
    def stds(self):
        return tuple(math.sqrt(v) for v in self.variance)


def wasserstein2_gaussian(a, b):
    """Order-2 Wasserstein distance between diagonal Gaussians.

    For diagonal covariances the optimal coupling is coordinate-wise and the
    squared distance splits into a location part and a scale part:
    ||mu_a - mu_b||^2 + sum_i (sigma_a,i - sigma_b,i)^2.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    loc = math.fsum((x - y) ** 2 for x, y in zip(a.mean, b.mean))
    scale = math.fsum((x - y) ** 2 for x, y in zip(a.stds, b.stds))
    return math.sqrt(loc + scale)


def mixture_kl_bounds(p, components, weights):
    """KL to a finite mixture, exactly and through its two upper bounds.

    Returns ``(exact, log_sum_exp_bound, min_bound)`` where

    * exact = KL(p || sum_b w_b q_b),
    * log_sum_exp_bound = -ln sum_b w_b exp(-KL(p || q_b)),
    * min_bound = min_b (KL(p || q_b) - ln w_b),

    and exact <= log_sum_exp_bound <= min_bound always holds. Individual
    zero weights are fine (their min-bound term is infinite); an empty or
    weightless mixture is an error.
    """
    components = list(components)
    weights = list(weights)
    if not components:
        raise ValueError("mixture has no components")
    if len(components) != len(weights):
        raise ValueError("component/weight count mismatch")
    _check_dist(weights, "weights")
    size = len(components[0])
    for comp in components:
        if len(comp) != size:
            raise ValueError("mixture components disagree on alphabet size")

    mixed = [math.fsum(w * comp[i] for w, comp in zip(weights, components))
             for i in range(size)]
    exact = kl_discrete(p, mixed)

    kls = [kl_discrete(p, comp) for comp in components]

    # -ln sum_b w_b e^{-kl_b}, evaluated in log space so one huge component
    # divergence cannot underflow the whole sum
    exponents = [math.log(w) - kl if w > 0.0 else -math.inf
                 for w, kl in zip(weights, kls)]
    peak = max(exponents)
    if peak == -math.inf:
        lse = math.inf
    else:
        lse = -(peak + math.log(math.fsum(
            math.exp(e - peak) for e in exponents)))
        if lse < 0.0:
            lse = 0.0

    minb = min(kl - math.log(w) if w > 0.0 else math.inf
               for kl, w in zip(kls, weights))
    if minb < 0.0:
        minb = 0.0

    return exact, lse, minb
