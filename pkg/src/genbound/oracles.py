"""Sampling and enumeration oracles behind the closed-form claims.

Every routine here recomputes something the analytic modules assert,
through an independent route: Monte Carlo for the Gaussian location
model and the gradient-descent counterexample, a noisy-trace run for
the SGLD bounds, a dense grid for the kl inversion, and brute-force
composition counting for the type lattice.  The sampled oracles are
deterministic by construction: replicates are laid out in fixed-size
chunks, chunk ``i`` draws from its own counter-based stream, and the
chunk partials are reduced in index order, so the reported numbers are
bit-identical across runs and across worker-pool sizes.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .expected_bounds import sgld_incoherence, sgld_pensia

__all__ = [
    "GdCounterexampleSpec",
    "GlmSpec",
    "RngSpec",
    "SgldProblem",
    "gd_counterexample_run",
    "glm_exact_gen",
    "glm_mc_gen",
    "glm_single_letter_mi",
    "glm_wasserstein_terms",
    "kl_inverse_brute",
    "sgld_trace_demo",
    "types_enumerate",
]

# Fixed chunk width for the replicate layout.  The chunk boundaries are
# part of the stream contract (chunk i seeds its own Philox counter), so
# changing this constant changes every sampled number.
_CHUNK = 8192

# Soft cap on float64 scratch per chunk, in array cells.
_CHUNK_CELLS = 1 << 24


@dataclass(frozen=True)
class RngSpec:
    """Root seed for a reproducible replicate family.

    Replicate chunk ``i`` draws from ``Philox(key=seed)`` advanced to
    counter block ``i``, which makes the streams independent of how the
    chunks are scheduled.
    """

    seed: int

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ValueError(
                f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))


def _stream(seed, index):
    return np.random.Generator(
        np.random.Philox(key=seed, counter=index << 128))


def _thread_count():
    raw = os.environ.get("GENBOUND_THREADS", "").strip()
    if raw:
        count = int(raw)
        if count < 1:
            raise ValueError(
                f"GENBOUND_THREADS must be a positive integer, got {raw!r}")
        return count
    return os.cpu_count() or 1


def _map_chunks(worker, total, chunk):
    """Run ``worker(chunk_index, size)`` over the chunk layout of
    ``total`` replicates; partials come back in index order regardless
    of scheduling."""
    sizes = [(i, min(chunk, total - i * chunk))
             for i in range((total + chunk - 1) // chunk)]
    threads = min(_thread_count(), len(sizes))
    if threads <= 1:
        return [worker(i, c) for i, c in sizes]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ic: worker(*ic), sizes))


def _mean_and_se(s1, s2, count):
    mean = s1 / count
    if count < 2:
        return mean, math.nan
    var = max(s2 - count * mean * mean, 0.0) / (count - 1)
    return mean, math.sqrt(var / count)


# ---------------------------------------------------------------------------
# Gaussian location model


@dataclass(frozen=True)
class GlmSpec:
    """Location estimation: n draws of N(mu, sigma2 I_d), W = sample
    mean, loss ||w - z||.  ``mu`` defaults to the origin; every closed
    form below is translation-invariant."""

    d: int
    sigma2: float
    n: int
    mu: tuple = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.sigma2 > 0.0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "sigma2", float(self.sigma2))
        if self.mu is not None:
            mu = tuple(float(x) for x in self.mu)
            if len(mu) != self.d:
                raise ValueError(
                    f"mu must have length d={self.d}, got {len(mu)}")
            object.__setattr__(self, "mu", mu)


def _gamma_ratio(d):
    # Gamma((d+1)/2) / Gamma(d/2), stable for large d via lgamma
    return math.exp(math.lgamma((d + 1) / 2.0) - math.lgamma(d / 2.0))


def glm_exact_gen(spec):
    """Exact expected generalization gap of the sample mean."""
    n, d = spec.n, spec.d
    return (math.sqrt(2.0 * spec.sigma2 / n)
            * (math.sqrt(n + 1.0) - math.sqrt(n - 1.0)) * _gamma_ratio(d))


def glm_mc_gen(spec, replicates, rng, draw_all=False):
    """Monte-Carlo estimate of the same gap, with its standard error.

    The default path draws three Gaussians per replicate (the first
    training point, the summed remainder, and a ghost point), which has
    the exact joint law of (W, Z_1, Z') by sufficiency; by
    exchangeability E[gap] equals the expected generalization error.
    ``draw_all`` keeps the naive n+1-vector layout for cross-checking
    the shortcut.  Chunked counter-based streams; see the module note.
    """
    if int(replicates) != replicates or replicates < 100:
        raise ValueError(
            f"replicates must be an integer >= 100, got {replicates!r}")
    replicates = int(replicates)
    n, d, sigma = spec.n, spec.d, math.sqrt(spec.sigma2)
    mu = np.zeros(d) if spec.mu is None else np.asarray(spec.mu)
    rows = (n + 1) if draw_all else 3
    chunk = min(_CHUNK, max(1, _CHUNK_CELLS // (rows * d)))

    def worker(index, count):
        g = _stream(rng.seed, index).standard_normal((count, rows, d))
        if draw_all:
            zs = mu + sigma * g
            w = zs[:, :n].mean(axis=1)
            gap = (np.linalg.norm(w - zs[:, n], axis=1)
                   - np.linalg.norm(w - zs[:, 0], axis=1))
        else:
            z1 = mu + sigma * g[:, 0]
            rest = (n - 1) * mu + sigma * math.sqrt(n - 1.0) * g[:, 1]
            ghost = mu + sigma * g[:, 2]
            w = (z1 + rest) / n
            gap = (np.linalg.norm(w - ghost, axis=1)
                   - np.linalg.norm(w - z1, axis=1))
        return float(np.sum(gap)), float(np.sum(gap * gap))

    parts = _map_chunks(worker, replicates, chunk)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    return _mean_and_se(s1, s2, replicates)


def glm_single_letter_mi(spec):
    """Per-sample information (d/2) ln(n/(n-1)) between W and one draw."""
    if spec.n < 2:
        raise ValueError("single-letter information needs n >= 2")
    return 0.5 * spec.d * math.log(spec.n / (spec.n - 1.0))


def glm_wasserstein_terms(spec, variant):
    """Closed-form transport terms feeding the Lipschitz gap bounds.

    ``full`` is the distance between posterior and prior over the whole
    sample, ``single_letter`` the per-sample version plus its mean-shift
    correction, ``random_subset`` the leave-one-out distance.  All are
    order-2 distances standing in for order 1.
    """
    if spec.n < 2:
        raise ValueError("transport terms need n >= 2")
    n, s2 = spec.n, spec.sigma2
    ratio = _gamma_ratio(spec.d)
    if variant == "full":
        return math.sqrt(4.0 * s2 / n) * ratio
    if variant == "single_letter":
        return (math.sqrt(2.0 * s2) / n) * ratio + math.sqrt(
            s2 * spec.d / n ** 3)
    if variant == "random_subset":
        return (math.sqrt(4.0 * s2) / n) * ratio
    raise ValueError(f"unknown transport variant {variant!r}")


# ---------------------------------------------------------------------------
# gradient-descent counterexample


@dataclass(frozen=True)
class GdCounterexampleSpec:
    """Coordinate-vector problem on which GD's information stays O(1).

    Instances are the d coordinate vectors under the uniform law, the
    loss is -<w, z> on the unit ball (so the problem sits in the
    Lipschitz-1, diameter-2 class), and GD runs T steps at rate eta
    from the origin.  Defaults follow the construction: d = 2n^2,
    T = n^2, eta = 1/(n sqrt(n)).
    """

    n: int
    d: int = None
    T: int = None
    eta: float = None
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        n = int(self.n)
        object.__setattr__(self, "n", n)
        d = 2 * n * n if self.d is None else self.d
        if int(d) != d or d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "d", int(d))
        steps = n * n if self.T is None else self.T
        if int(steps) != steps or steps < 1:
            raise ValueError(f"T must be a positive integer, got {self.T!r}")
        object.__setattr__(self, "T", int(steps))
        eta = 1.0 / (n * math.sqrt(n)) if self.eta is None else float(self.eta)
        if not eta > 0.0:
            raise ValueError(f"eta must be positive, got {self.eta!r}")
        object.__setattr__(self, "eta", eta)
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ValueError(
                f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))


def gd_counterexample_run(spec, replicates):
    """Simulate the construction and report its headline statistics.

    Each replicate draws a supersample of 2n instances arranged in n
    pairs plus the selection bits U.  Because the batch gradient is the
    constant -Zbar, the final iterate is the positive multiple
    min(eta T, 1/||Zbar||) Zbar of the training mean, so its support is
    exactly the set of trained coordinates; the sign decoder and the
    distinctness event only need that support.

    mean_gen estimates (1/n) E|sum_i R_i| from the selection signs
    R_i = 1 - 2 U_i; the Khintchine floor 1/sqrt(2n) for that average
    is reported alongside.  decode_error_given_E is the empirical error
    of the support decoder over the replicates where all 2n draws are
    distinct, and is 0 there by construction (the run verifies rather
    than assumes this).  mean_gen_se and the replicate count ride along
    so callers can form confidence margins.
    """
    if int(replicates) != replicates or replicates < 1:
        raise ValueError(
            f"replicates must be a positive integer, got {replicates!r}")
    replicates = int(replicates)
    n, d = spec.n, spec.d

    def worker(index, count):
        gen = _stream(spec.seed, index)
        idx = gen.integers(0, d, size=(count, 2 * n))
        u = gen.integers(0, 2, size=(count, n))
        coins = gen.integers(0, 2, size=(count, n))

        signs = np.abs((1 - 2 * u).sum(axis=1)).astype(np.float64)

        srt = np.sort(idx, axis=1)
        distinct = np.all(srt[:, 1:] != srt[:, :-1], axis=1)

        pairs = idx.reshape(count, n, 2)
        trained = np.take_along_axis(pairs, u[:, :, None], axis=2)[:, :, 0]
        untrained = np.take_along_axis(
            pairs, (1 - u)[:, :, None], axis=2)[:, :, 0]
        # row-disambiguated keys so membership is tested per replicate
        row = (np.arange(count, dtype=np.int64) * d)[:, None]
        ambiguous = np.isin(row + untrained, row + trained)
        # the trained coordinate is always in the support, so the decode
        # fails only when the coin of an ambiguous pair lands wrong
        miss = ambiguous & (coins != u)
        return (float(signs.sum()), float(np.dot(signs, signs)),
                int(distinct.sum()), int(miss[distinct].sum()))

    parts = _map_chunks(worker, replicates, _CHUNK)
    s1 = math.fsum(p[0] for p in parts) / n
    s2 = math.fsum(p[1] for p in parts) / (n * n)
    n_event = sum(p[2] for p in parts)
    n_miss = sum(p[3] for p in parts)
    mean_gen, se = _mean_and_se(s1, s2, replicates)
    return {
        "mean_gen": mean_gen,
        "mean_gen_se": se,
        "khintchine_lb": 1.0 / math.sqrt(2.0 * n),
        "p_event_E": n_event / replicates,
        "decode_error_given_E": (n_miss / (n * n_event) if n_event
                                 else math.nan),
        "replicates": replicates,
    }


# ---------------------------------------------------------------------------
# SGLD trace demo

_SGLD_DIM = 2


@dataclass(frozen=True)
class SgldProblem:
    """Two-dimensional quadratic testbed for the noisy-trace bounds.

    Data are n draws of N(center, spread^2 I_2), the loss is
    (curvature/2)||w - z||^2, and per-sample gradients are clipped to
    norm ``clip`` so the trace satisfies the Lipschitz assumption the
    bounds need.  ``curvature = 0`` degenerates to a constant loss.
    """

    n: int = 16
    center: tuple = (6.0, 6.0)
    spread: float = 0.5
    curvature: float = 1.0
    clip: float = 1.0
    range_b: float = 1.0
    replicates: int = 64

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        center = tuple(float(x) for x in self.center)
        if len(center) != _SGLD_DIM:
            raise ValueError(f"center must have length 2, got {len(center)}")
        object.__setattr__(self, "center", center)
        for name in ("spread", "curvature"):
            value = float(getattr(self, name))
            if not value >= 0.0:
                raise ValueError(f"{name} must be >= 0, got {value!r}")
            object.__setattr__(self, name, value)
        for name in ("clip", "range_b"):
            value = float(getattr(self, name))
            if not value > 0.0:
                raise ValueError(f"{name} must be positive, got {value!r}")
            object.__setattr__(self, name, value)
        if int(self.replicates) != self.replicates or self.replicates < 2:
            raise ValueError(
                f"replicates must be an integer >= 2, got {self.replicates!r}")
        object.__setattr__(self, "replicates", int(self.replicates))


def _clip_rows(grads, limit):
    norms = np.linalg.norm(grads, axis=-1, keepdims=True)
    scale = np.where(norms > limit, limit / np.maximum(norms, 1e-300), 1.0)
    return grads * scale


def sgld_trace_demo(problem, steps, rng):
    """Run minibatch-1 noisy GD and price its trace both ways.

    steps: iterable of (step size, noise variance) pairs.  The run
    records, per step, the largest clipped per-sample gradient norm
    across all replicates (the realized stand-in for the global
    Lipschitz constant) and the mean squared incoherence of the sampled
    gradient against the leave-one-out batch mean.  Those statistics
    feed the per-iterate information bound and the incoherence bound;
    the squared-loss generalization gap of the final iterate is
    estimated against the analytic population risk.  The incoherence
    estimator has no canonical form, so that number is illustrative
    rather than certified; whether it undercuts the information bound
    is recorded, not asserted.
    """
    schedule = [(float(eta), float(sigma2)) for eta, sigma2 in steps]
    for eta, sigma2 in schedule:
        if not eta >= 0.0:
            raise ValueError(f"step size must be >= 0, got {eta!r}")
        if not sigma2 > 0.0:
            raise ValueError("noise variance must be positive")
    n, kappa, limit = problem.n, problem.curvature, problem.clip
    center = np.asarray(problem.center)
    steps_total = len(schedule)

    sup_norm = np.zeros(steps_total)
    inc2_sum = np.zeros(steps_total)
    gen_sum = 0.0
    gen_sq = 0.0
    for rep in range(problem.replicates):
        gen = _stream(rng.seed, rep)
        zs = center + problem.spread * gen.standard_normal((n, _SGLD_DIM))
        w = np.zeros(_SGLD_DIM)
        for t, (eta, sigma2) in enumerate(schedule):
            grads = _clip_rows(kappa * (w - zs), limit)
            norms = np.linalg.norm(grads, axis=1)
            sup_norm[t] = max(sup_norm[t], float(norms.max()))
            j = int(gen.integers(0, n))
            loo_mean = (grads.sum(axis=0) - grads[j]) / (n - 1)
            inc = grads[j] - loo_mean
            inc2_sum[t] += float(np.dot(inc, inc))
            w = (w - eta * grads[j]
                 + math.sqrt(sigma2) * gen.standard_normal(_SGLD_DIM))
        emp = 0.5 * kappa * float(
            np.mean(np.sum((w - zs) ** 2, axis=1)))
        pop = 0.5 * kappa * (float(np.dot(w - center, w - center))
                             + _SGLD_DIM * problem.spread ** 2)
        gap = pop - emp
        gen_sum += gap
        gen_sq += gap * gap

    pensia = math.fsum(
        sgld_pensia([(eta, sigma2)], _SGLD_DIM, sup_norm[t])
        for t, (eta, sigma2) in enumerate(schedule))
    incoherence = sgld_incoherence(
        [(eta, sigma2, inc2_sum[t] / problem.replicates)
         for t, (eta, sigma2) in enumerate(schedule)],
        batch=1, range_b=problem.range_b)
    mc_gen, mc_se = _mean_and_se(gen_sum, gen_sq, problem.replicates)
    return {
        "pensia_bound": pensia,
        "incoherence_bound": incoherence,
        "mc_gen_estimate": mc_gen,
        "mc_gen_se": mc_se,
        "incoherence_leq_pensia": incoherence <= pensia,
    }


# ---------------------------------------------------------------------------
# grid and enumeration oracles


def kl_inverse_brute(r_hat, budget, grid_size):
    """Dense-grid upper inverse of the binary relative entropy.

    Scans grid_size + 1 evenly spaced candidates on [r_hat, 1] and
    returns the largest one within budget; the bisection routine must
    agree with this to within the grid pitch.
    """
    if not 0.0 <= r_hat <= 1.0:
        raise ValueError(f"r_hat must lie in [0,1], got {r_hat!r}")
    if math.isnan(budget) or budget < 0.0:
        raise ValueError(f"budget must be >= 0, got {budget!r}")
    if int(grid_size) != grid_size or grid_size < 10 ** 4:
        raise ValueError(
            f"grid_size must be an integer >= 10^4, got {grid_size!r}")
    grid = r_hat + (1.0 - r_hat) * np.linspace(0.0, 1.0, int(grid_size) + 1)
    with np.errstate(divide="ignore"):
        kl = np.zeros(grid.size)
        if r_hat > 0.0:
            kl += r_hat * (math.log(r_hat) - np.log(grid))
        if r_hat < 1.0:
            kl += (1.0 - r_hat) * (math.log1p(-r_hat) - np.log1p(-grid))
    feasible = np.flatnonzero(kl <= budget)
    return float(grid[feasible[-1]])


def types_enumerate(z, n):
    """Count the empirical distributions of n samples over z symbols by
    exhaustively walking the compositions (no binomial shortcut)."""
    if int(z) != z or z < 1 or int(n) != n or n < 0:
        raise ValueError(
            f"need z >= 1 and n >= 0 integers, got z={z!r}, n={n!r}")
    z, n = int(z), int(n)
    if math.comb(n + z - 1, z - 1) > 10 ** 7:
        raise ValueError("enumeration would exceed 10^7 compositions")

    def walk(parts, remaining):
        if parts == 1:
            return 1
        return sum(walk(parts - 1, remaining - head)
                   for head in range(remaining + 1))

    return walk(z, n)
