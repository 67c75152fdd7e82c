"""Ship gate: the end-to-end checks the library must pass as a whole.

Each class is one independently meaningful claim (equivalences between
bound families, oracle agreement, frozen figure values, combinatorial
identities, property invariants).  Tolerances are deliberate: analytic
identities get 1e-12-ish slack, optimizer equivalences 1e-6, Monte
Carlo gets three standard errors at fixed seeds, and the figure CSVs
are locked digit-for-digit against the files under tests/golden/.
Wall-clock caps are asserted where a rewrite could silently turn a
cheap check into an hours-long one.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genbound.cgf import CgfEnvelope, psi_star_inverse
from genbound.cli import main as cli_main
from genbound.expected_bounds import DependencyVector, aggregate_single_letter
from genbound.measures import (
    chi2_discrete,
    kl_discrete,
    mixture_kl_bounds,
    tv_discrete,
    tv_from_kl,
)
from genbound.oracles import (
    GdCounterexampleSpec,
    GlmSpec,
    RngSpec,
    gd_counterexample_run,
    glm_exact_gen,
    glm_mc_gen,
    glm_single_letter_mi,
    kl_inverse_brute,
    types_enumerate,
)
from genbound.pb_bounded import (
    BoundContext,
    catoni_uniform,
    fast_rate_optimal,
    kl_inverse_upper,
    mixed_rate,
    rivasplata,
    seeger_langford,
    thiemann,
)
from genbound.pb_unbounded import (
    chernoff_analogue_cutoff,
    chernoff_analogue_open,
    event_space_optimize,
    martingale_second_moment,
)
from genbound.privacy_bounds import simplex_cover_count

GOLDEN = Path(__file__).parent / "golden"

EMP_GRID = [0.5 * i / 19.0 for i in range(20)]
DEP_GRID = [200.0 * j / 19.0 for j in range(20)]
BETA_GRID = (0.5, 0.1, 0.05, 0.01, 0.001)


def grid_contexts():
    for emp in EMP_GRID:
        for dep in DEP_GRID:
            for beta in BETA_GRID:
                yield BoundContext(n=100, beta=beta, dependency=dep,
                                   emp_risk=emp)


def fit_slope(xs, ys):
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    mx = sum(lx) / len(lx)
    my = sum(ly) / len(ly)
    num = sum((a - mx) * (b - my) for a, b in zip(lx, ly))
    den = sum((a - mx) ** 2 for a in lx)
    return num / den


def read_rows(path):
    rows = [line.split(",") for line in Path(path).read_text().splitlines()
            if not line.startswith("#")]
    return rows[0], rows[1:]


def cells_close(a, b, rel=1e-12):
    x, y = float(a), float(b)
    if math.isnan(x) or math.isnan(y):
        return math.isnan(x) and math.isnan(y)
    if x == y:
        return True
    return abs(x - y) <= rel * max(abs(x), abs(y))


class TestSmallKlEquivalence:
    """The optimized fast-rate and Catoni families collapse onto the
    kl-inverse bound; all three are parametrizations of one geometry."""

    def test_triple_agrees_on_grid(self):
        start = time.monotonic()
        worst = 0.0
        for ctx in grid_contexts():
            sl = seeger_langford(ctx).value
            fr = fast_rate_optimal(ctx).value
            cu = catoni_uniform(ctx).value
            worst = max(worst, abs(sl - fr), abs(sl - cu))
        assert worst <= 1e-6
        assert time.monotonic() - start < 30.0


class TestDominanceChain:
    def test_fixed_parameter_families_are_looser(self):
        for ctx in grid_contexts():
            fr = fast_rate_optimal(ctx).value
            mr = mixed_rate(ctx).value
            th = thiemann(ctx).value
            rv = rivasplata(ctx).value
            assert fr <= mr + 1e-9
            assert mr <= th + 1e-9
            assert mr <= rv + 1e-9


class TestGaussianLocationModel:
    SEED = 11
    REPLICATES = 10 ** 6

    def test_closed_form_within_monte_carlo_error(self):
        start = time.monotonic()
        for d in (1, 250):
            for n in (2, 10, 100):
                spec = GlmSpec(d=d, sigma2=1.0, n=n)
                est, se = glm_mc_gen(spec, self.REPLICATES,
                                     RngSpec(seed=self.SEED))
                assert abs(est - glm_exact_gen(spec)) <= 3.0 * se, (d, n)
        assert time.monotonic() - start < 300.0

    def test_decay_rates_on_log_log_sweep(self):
        ns = sorted(set(round(10.0 ** (k / 12.0)) for k in range(4, 49)))
        env = CgfEnvelope.sub_gaussian(1.0)
        exact, mi_bound = [], []
        for n in ns:
            spec = GlmSpec(d=1, sigma2=1.0, n=n)
            exact.append(glm_exact_gen(spec))
            per_sample = glm_single_letter_mi(spec)
            mi_bound.append(aggregate_single_letter(
                DependencyVector((per_sample,) * n), n, "sqrt_each", env))
        assert -1.1 <= fit_slope(ns, exact) <= -0.9
        assert -0.6 <= fit_slope(ns, mi_bound) <= -0.4


class TestGdCounterexample:
    SEED = 5
    REPLICATES = 10 ** 5
    NS = (1, 2, 5, 10, 20, 50)

    def test_floor_event_and_decoder(self):
        start = time.monotonic()
        gens = []
        for n in self.NS:
            report = gd_counterexample_run(
                GdCounterexampleSpec(n=n, seed=self.SEED), self.REPLICATES)
            floor = 1.0 / math.sqrt(2.0 * n)
            assert report["khintchine_lb"] == pytest.approx(floor)
            assert report["mean_gen"] >= floor - 3.0 * report["mean_gen_se"]
            assert report["p_event_E"] >= 0.1
            assert report["decode_error_given_E"] == 0.0
            gens.append(report["mean_gen"])
        assert -0.6 <= fit_slope(self.NS, gens) <= -0.4
        assert time.monotonic() - start < 120.0


class TestKlInverseAgainstScan:
    def test_bisection_matches_grid_scan(self):
        gen = np.random.Generator(np.random.Philox(key=20240601))
        r_hats = gen.uniform(0.0, 0.95, size=500)
        budgets = 10.0 ** gen.uniform(-4.0, math.log10(4.0), size=500)
        for r_hat, budget in zip(r_hats, budgets):
            fine = kl_inverse_brute(float(r_hat), float(budget),
                                    grid_size=10 ** 6)
            assert abs(kl_inverse_upper(float(r_hat), float(budget))
                       - fine) <= 2e-6

    def test_zero_risk_closed_form(self):
        for budget in (1e-9, 1e-4, 0.01, 0.3, 1.0, 2.5, 10.0, 50.0):
            got = kl_inverse_upper(0.0, budget)
            assert abs(got - (1.0 - math.exp(-budget))) <= 1e-12


class TestMixtureOrdering:
    def simplex(self, gen, size):
        raw = gen.standard_exponential(size)
        return [float(v) for v in raw / raw.sum()]

    def test_bounds_are_ordered_on_random_mixtures(self):
        gen = np.random.Generator(np.random.Philox(key=7))
        for _ in range(1000):
            z = int(gen.integers(2, 9))
            k = int(gen.integers(1, 6))
            p = self.simplex(gen, z)
            comps = [self.simplex(gen, z) for _ in range(k)]
            weights = self.simplex(gen, k)
            exact, lse, min_form = mixture_kl_bounds(p, comps, weights)
            assert exact >= -1e-12
            assert exact <= lse + 1e-12
            assert lse <= min_form + 1e-12

    def test_single_component_collapse_is_tight(self):
        gen = np.random.Generator(np.random.Philox(key=8))
        for _ in range(100):
            z = int(gen.integers(2, 9))
            p = self.simplex(gen, z)
            q = self.simplex(gen, z)
            exact, lse, min_form = mixture_kl_bounds(p, [q], [1.0])
            reference = kl_discrete(p, q)
            assert abs(exact - reference) <= 1e-12
            assert abs(lse - reference) <= 1e-12
            assert abs(min_form - reference) <= 1e-12


class TestTypeCounting:
    def test_enumeration_matches_binomial(self):
        for z in range(1, 7):
            for n in range(0, 13):
                assert types_enumerate(z, n) == math.comb(n + z - 1, z - 1)

    def test_corner_counts_satisfy_recursion(self):
        for k in range(2, 7):
            for t in range(1, 51):
                total = sum(simplex_cover_count(k - 1, j)[0]
                            for j in range(1, t + 1))
                assert simplex_cover_count(k, t)[0] == total

    def test_known_small_value(self):
        assert simplex_cover_count(2, 4)[0] == 10


@pytest.fixture(scope="module")
def dp_figures(tmp_path_factory):
    out = tmp_path_factory.mktemp("dp_figs")
    start = time.monotonic()
    assert cli_main(["figure", "dp_pacbayes", "--out", str(out)]) == 0
    assert cli_main(["figure", "dp_expected", "--out", str(out)]) == 0
    assert time.monotonic() - start < 60.0
    return out


@pytest.fixture(scope="module")
def variance_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("var_figs")
    assert cli_main(["figure", "variance_bounds", "--out", str(out)]) == 0
    return out / "variance_bounds.csv"


class TestFrozenDpFigures:
    def test_values_locked_to_golden(self, dp_figures):
        for name in ("dp_pacbayes", "dp_expected"):
            got_header, got = read_rows(dp_figures / f"{name}.csv")
            want_header, want = read_rows(GOLDEN / f"{name}.csv")
            assert got_header == want_header
            assert len(got) == len(want)
            for g, w in zip(got, want):
                assert g[:2] == w[:2]
                for a, b in zip(g[2:], w[2:]):
                    assert cells_close(a, b), (name, g[0], g[1])

    def test_cover_beats_crude_count(self, dp_figures):
        header, rows = read_rows(dp_figures / "dp_pacbayes.csv")
        simple = header.index("simple")
        hyper = header.index("hypercube")
        for row in rows:
            if row[0] == "n":
                assert float(row[hyper]) < float(row[simple])
            elif float(row[1]) < 1.0 / math.e:
                assert float(row[hyper]) < float(row[simple])

    def test_high_probability_curves_decrease_in_n(self, dp_figures):
        header, rows = read_rows(dp_figures / "dp_pacbayes.csv")
        for col in range(2, len(header)):
            values = [float(r[col]) for r in rows if r[0] == "n"]
            for a, b in zip(values, values[1:]):
                assert b <= a + 1e-12
            assert values[-1] < values[0]

    def test_expectation_figure_crosses_over(self, dp_figures):
        header, rows = read_rows(dp_figures / "dp_expected.csv")
        type_cols = [header.index(c)
                     for c in ("simple", "hypercube", "simplex", "typical")]
        base_cols = [header.index(c)
                     for c in ("dwork", "bun", "stability")]

        def best(row, cols):
            vals = [float(row[c]) for c in cols]
            return min(v for v in vals if not math.isnan(v))

        panel = [r for r in rows if r[0] == "n"]
        first, last = panel[0], panel[-1]
        assert best(first, base_cols) < best(first, type_cols)
        assert best(last, type_cols) < best(last, base_cols)


class TestFrozenVarianceFigure:
    def test_caption_point_is_byte_identical(self, variance_csv):
        got = [l for l in variance_csv.read_text().splitlines()
               if l.startswith("caption,")]
        want = [l for l in (GOLDEN / "variance_bounds.csv")
                .read_text().splitlines() if l.startswith("caption,")]
        assert got == want
        assert len(got) == 1

    def test_main_curve_wins_somewhere_in_every_sweep(self, variance_csv):
        header, rows = read_rows(variance_csv)
        cols = {name: header.index(name)
                for name in ("alquier", "ohnishi1", "ohnishi2", "main")}
        for sweep in ("beta", "chi2", "emp", "n"):
            wins = 0
            for row in rows:
                if row[0] != sweep:
                    continue
                main = float(row[cols["main"]])
                others = min(float(row[cols[c]])
                             for c in ("alquier", "ohnishi1", "ohnishi2"))
                wins += main < others
            assert wins > 0, sweep

    def test_all_sweeps_locked_to_golden(self, variance_csv):
        _, got = read_rows(variance_csv)
        _, want = read_rows(GOLDEN / "variance_bounds.csv")
        assert len(got) == len(want)
        for g, w in zip(got, want):
            assert g[0] == w[0]
            for a, b in zip(g[1:], w[1:]):
                assert cells_close(a, b)


class TestEventSpaceEngine:
    """The generic bucket engine re-derives each hand-written closed
    form when fed that form's per-bucket statement."""

    ENV = CgfEnvelope.sub_gaussian(1.0)
    CONTEXTS = [
        BoundContext(n=n, beta=beta, dependency=dep, emp_risk=0.1)
        for n in (30, 100, 1000)
        for beta in (0.05, 0.01)
        for dep in (0.0, 2.0, 7.5)
    ]

    def cutoff_bucket(self, ctx):
        def fn(k, b):
            return psi_star_inverse(
                self.ENV, (k - 1.0 + math.log(math.e / b)) / ctx.n)
        return fn

    def test_reproduces_cutoff_form(self):
        for ctx in self.CONTEXTS:
            got = event_space_optimize(self.cutoff_bucket(ctx), ctx.n,
                                       ctx.beta, "cutoff", ctx.dependency)
            want = chernoff_analogue_cutoff(ctx, self.ENV,
                                            union_mode="linear").value
            assert got == pytest.approx(want, rel=1e-12)

    def test_reproduces_open_form(self):
        for ctx in self.CONTEXTS:
            got = event_space_optimize(self.cutoff_bucket(ctx), ctx.n,
                                       ctx.beta, "open", ctx.dependency)
            want = chernoff_analogue_open(ctx, self.ENV).value
            assert got == pytest.approx(want, rel=1e-12)

    def test_reproduces_martingale_form(self):
        for ctx in self.CONTEXTS:
            for vp in (0.5, 3.0):
                n = ctx.n

                def bucket(k, b):
                    return (2.0 / math.sqrt(6.0)) * math.sqrt(
                        (vp + 1.0) * (k - 1.0 + math.log(
                            2.0 * math.e * (n + 1.0) ** 2 / b)))

                got = event_space_optimize(
                    bucket, n * math.log(math.e * n), ctx.beta, "cutoff",
                    ctx.dependency)
                want = martingale_second_moment(ctx, vp).value
                assert got == pytest.approx(want, rel=1e-12)

    def test_open_corollary_never_beats_exact(self):
        for ctx in self.CONTEXTS:
            res = chernoff_analogue_open(ctx, self.ENV)
            assert res.params["corollary"] >= res.value


@st.composite
def discrete_pairs(draw):
    size = draw(st.integers(min_value=2, max_value=8))
    raw_p = draw(st.lists(st.floats(1e-3, 1.0), min_size=size,
                          max_size=size))
    raw_q = draw(st.lists(st.floats(1e-3, 1.0), min_size=size,
                          max_size=size))
    sp, sq = math.fsum(raw_p), math.fsum(raw_q)
    return [v / sp for v in raw_p], [v / sq for v in raw_q]


@st.composite
def envelopes_with_point(draw):
    kind = draw(st.sampled_from(("sub_gaussian", "sub_gamma",
                                 "sub_exponential")))
    sigma2 = draw(st.floats(1e-2, 10.0))
    z = draw(st.floats(1e-6, 10.0))
    if kind == "sub_gaussian":
        return CgfEnvelope.sub_gaussian(sigma2), z
    c = draw(st.floats(1e-2, 5.0))
    if kind == "sub_gamma":
        return CgfEnvelope.sub_gamma(sigma2, c), z
    return CgfEnvelope.sub_exponential(sigma2, c), z


PROPERTY = settings(derandomize=True, max_examples=2000, deadline=None)


class TestDivergenceProperties:
    @PROPERTY
    @given(discrete_pairs())
    def test_divergences_are_non_negative(self, pq):
        p, q = pq
        assert kl_discrete(p, q) >= 0.0
        assert tv_discrete(p, q) >= 0.0
        assert chi2_discrete(p, q) >= 0.0

    @PROPERTY
    @given(discrete_pairs())
    def test_kl_below_log_chi2_below_chi2(self, pq):
        p, q = pq
        chi2 = chi2_discrete(p, q)
        assert kl_discrete(p, q) <= math.log1p(chi2) + 1e-12
        assert math.log1p(chi2) <= chi2 + 1e-12

    @PROPERTY
    @given(discrete_pairs())
    def test_tv_below_kl_combination(self, pq):
        p, q = pq
        assert tv_discrete(p, q) <= tv_from_kl(kl_discrete(p, q)) + 1e-12

    @PROPERTY
    @given(st.floats(0.0, 1e6))
    def test_kl_combination_is_capped(self, kl):
        assert 0.0 <= tv_from_kl(kl) <= 1.0

    @PROPERTY
    @given(envelopes_with_point())
    def test_conjugate_inverse_closed_forms(self, env_z):
        env, z = env_z
        closed = psi_star_inverse(env, z)
        numeric = psi_star_inverse(env, z, method="numeric")
        assert abs(closed - numeric) <= 1e-6 * max(abs(closed), 1e-12)
