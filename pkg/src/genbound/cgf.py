"""CGF envelopes and the conjugate inverse that sets Chernoff-style rates.

An envelope is a convex function psi dominating the centered cumulant
generating function of a loss on a domain [0, b). Every tail-driven bound in
this library consumes an envelope through ``psi_star_inverse``,

    psi_star_inverse(z) = inf over lam in (0, b) of (z + psi(lam)) / lam,

the generalized inverse of the convex conjugate. Closed forms are used where
they exist and a grid + golden-section optimizer covers the rest; the two
routes are kept mutually checkable via ``method="numeric"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .measures import kl_bernoulli

__all__ = [
    "CgfEnvelope",
    "bernoulli_cgf_conjugate",
    "psi",
    "psi_star_inverse",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(fn, lo, hi, width=1e-10, max_iter=200):
    """Golden-section minimum of a unimodal fn on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= width:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def _monotone_tangents(xs, ys):
    # Fritsch-Carlson: secants, then tangents limited so the interpolant
    # cannot overshoot between knots
    k = len(xs)
    d = [(ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) for i in range(k - 1)]
    m = [0.0] * k
    m[0] = d[0]
    m[-1] = d[-1]
    for i in range(1, k - 1):
        if d[i - 1] * d[i] <= 0.0:
            m[i] = 0.0
        else:
            m[i] = 0.5 * (d[i - 1] + d[i])
    for i in range(k - 1):
        if d[i] == 0.0:
            m[i] = m[i + 1] = 0.0
            continue
        a, b = m[i] / d[i], m[i + 1] / d[i]
        s = a * a + b * b
        if s > 9.0:
            t = 3.0 / math.sqrt(s)
            m[i] = t * a * d[i]
            m[i + 1] = t * b * d[i]
    return d, m


@dataclass(frozen=True)
class CgfEnvelope:
    """A dominating CGF with its domain limit ``b`` (may be ``math.inf``).

    Build instances through the classmethods; the constructor fields are an
    implementation detail.
    """

    kind: str
    sigma2: float = 0.0
    c: float = 0.0
    knots: tuple = ()
    values: tuple = ()
    tangents: tuple = field(default=(), repr=False)
    b: float = math.inf

    @classmethod
    def sub_gaussian(cls, sigma2):
        if not sigma2 > 0.0:
            raise ValueError(f"sigma2 must be positive, got {sigma2!r}")
        return cls(kind="sub_gaussian", sigma2=float(sigma2), b=math.inf)

    @classmethod
    def sub_gamma(cls, sigma2, c):
        if not sigma2 > 0.0 or not c > 0.0:
            raise ValueError("sub_gamma needs sigma2 > 0 and c > 0")
        return cls(kind="sub_gamma", sigma2=float(sigma2), c=float(c),
                   b=1.0 / float(c))

    @classmethod
    def sub_exponential(cls, sigma2, c):
        if not sigma2 > 0.0 or not c > 0.0:
            raise ValueError("sub_exponential needs sigma2 > 0 and c > 0")
        return cls(kind="sub_exponential", sigma2=float(sigma2), c=float(c),
                   b=1.0 / float(c))

    @classmethod
    def custom(cls, knots, values):
        """Tabulated envelope on [0, max(knots)); monotone-cubic between
        knots. The table must start at (0, 0), be strictly increasing in
        lambda, and look convex with a flat start (psi'(0) = 0)."""
        xs = tuple(float(x) for x in knots)
        ys = tuple(float(y) for y in values)
        if len(xs) != len(ys) or len(xs) < 3:
            raise ValueError("custom envelope needs >= 3 matching knots")
        if xs[0] != 0.0 or ys[0] != 0.0:
            raise ValueError("custom envelope table must start at (0, 0)")
        for i in range(len(xs) - 1):
            if not xs[i + 1] > xs[i]:
                raise ValueError("knots must be strictly increasing")
        if any(y < 0.0 for y in ys):
            raise ValueError("envelope values must be non-negative")
        secants, tangents = _monotone_tangents(xs, ys)
        for i in range(len(secants) - 1):
            if secants[i + 1] < secants[i] - 1e-12:
                raise ValueError("table is not convex (secants decrease)")
        # forward-difference proxy for psi'(0) = 0: the first secant must be
        # explained by curvature, i.e. not exceed the first slope increment
        if len(secants) >= 2 and secants[0] > secants[1] - secants[0] + 1e-9:
            raise ValueError("table does not flatten at 0 (psi'(0) != 0?)")
        return cls(kind="custom", knots=xs, values=ys,
                   tangents=tuple(tangents), b=xs[-1])

    def _eval(self, lam):
        """psi(lam) without the right-boundary domain check (the optimizer
        needs the boundary limit); lam must still be >= 0."""
        if self.kind == "sub_gaussian":
            return lam * lam * self.sigma2 / 2.0
        if self.kind == "sub_gamma":
            if lam >= self.b:
                return math.inf
            return lam * lam * self.sigma2 / (2.0 * (1.0 - self.c * lam))
        if self.kind == "sub_exponential":
            if lam > self.b:
                return math.inf
            return lam * lam * self.sigma2 / 2.0
        # custom: cubic Hermite on the bracketing interval
        xs, ys, ms = self.knots, self.values, self.tangents
        if lam > xs[-1]:
            return math.inf
        if lam == xs[-1]:
            return ys[-1]
        i = 0
        for j in range(len(xs) - 1):
            if lam < xs[j + 1]:
                i = j
                break
        h = xs[i + 1] - xs[i]
        t = (lam - xs[i]) / h
        t2, t3 = t * t, t * t * t
        return ((2.0 * t3 - 3.0 * t2 + 1.0) * ys[i]
                + (t3 - 2.0 * t2 + t) * h * ms[i]
                + (-2.0 * t3 + 3.0 * t2) * ys[i + 1]
                + (t3 - t2) * h * ms[i + 1])


def psi(env, lam):
    """Evaluate the envelope at lam in [0, b)."""
    if math.isnan(lam) or lam < 0.0 or lam >= env.b:
        raise ValueError(
            f"lambda must lie in [0, {env.b!r}), got {lam!r}")
    return env._eval(lam)


def _conjugate_inverse_numeric(env, z):
    def objective(lam):
        return (z + env._eval(lam)) / lam

    if math.isinf(env.b):
        hi = 1.0
        while hi < 1e12 and objective(2.0 * hi) < objective(hi):
            hi *= 2.0
        hi *= 2.0
        lo = 1e-12
    else:
        lo = env.b * 1e-6
        hi = env.b * (1.0 - 1e-6)

    # 400-point log grid, then golden-section on the bracketing interval
    ratio = (hi / lo) ** (1.0 / 399.0)
    best_i, best_v = 0, math.inf
    grid = []
    x = lo
    for i in range(400):
        grid.append(x)
        v = objective(x)
        if v < best_v:
            best_i, best_v = i, v
        x *= ratio
    a = grid[max(best_i - 1, 0)]
    c = grid[min(best_i + 1, 399)]
    _, refined = _golden_min(objective, a, c)
    best = min(best_v, refined)

    # the infimum may sit at the right edge of the domain; take the
    # boundary limit when it is finite
    if not math.isinf(env.b):
        edge = env._eval(env.b)
        if not math.isinf(edge):
            best = min(best, (z + edge) / env.b)
    return best


def psi_star_inverse(env, z, method="auto"):
    """Generalized inverse of the envelope's convex conjugate.

    Closed forms (``method="auto"``):

    * sub-Gaussian: sqrt(2 sigma^2 z)
    * sub-gamma:    sqrt(2 sigma^2 z) + c z
    * sub-exponential: sqrt(2 sigma^2 z) while the unconstrained minimizer
      fits the domain (z <= sigma^2 / (2 c^2)), and the domain-edge value
      c z + sigma^2 / (2 c) beyond it

    ``method="numeric"`` forces the generic infimum search for any kind,
    which is how the closed forms are cross-checked.
    """
    if math.isnan(z) or z < 0.0:
        raise ValueError(f"z must be >= 0, got {z!r}")
    if z == 0.0:
        return 0.0
    if method not in ("auto", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    if method == "numeric" or env.kind == "custom":
        return _conjugate_inverse_numeric(env, z)
    if env.kind == "sub_gaussian":
        return math.sqrt(2.0 * env.sigma2 * z)
    if env.kind == "sub_gamma":
        return math.sqrt(2.0 * env.sigma2 * z) + env.c * z
    if env.kind == "sub_exponential":
        if z <= env.sigma2 / (2.0 * env.c * env.c):
            return math.sqrt(2.0 * env.sigma2 * z)
        return env.c * z + env.sigma2 / (2.0 * env.c)
    raise ValueError(f"unknown envelope kind {env.kind!r}")


def bernoulli_cgf_conjugate(mean_r, t):
    """Conjugate of the Bernoulli CGF: kl(mean_r - t || mean_r).

    Defined for 0 <= t <= mean_r <= 1; this is the exact rate function the
    small-kl bounds invert.
    """
    if not 0.0 <= mean_r <= 1.0:
        raise ValueError(f"mean_r must be in [0,1], got {mean_r!r}")
    if not 0.0 <= t <= mean_r:
        raise ValueError(f"t must be in [0, mean_r], got {t!r}")
    return kl_bernoulli(mean_r - t, mean_r)
