"""Recompute the reference curves for the figure regression tests.

Standalone re-derivation, on purpose: this script imports nothing from the
package (stdlib math only) and evaluates every closed form from scratch, so
the CSVs it writes under tests/golden/ are an independent cross-check of the
library, not an echo of it.  Re-running the script must reproduce the files
byte for byte.

Usage: python tools/make_golden.py [outdir]
"""

import math
import sys
from pathlib import Path


# ---------------------------------------------------------------------------
# scalar building blocks

def kl_bernoulli(p, q):
    if p == q:
        return 0.0
    if q <= 0.0 or q >= 1.0:
        return math.inf
    s = 0.0
    if p > 0.0:
        s += p * math.log(p / q)
    if p < 1.0:
        s += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return s


def kl_inverse_upper(r_hat, budget):
    """Largest r in [r_hat, 1] with kl(r_hat||r) <= budget.

    Fixed 100-iteration bisection; no early exit, so the result is a pure
    function of the inputs down to the last bit.
    """
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


def xi_conservative(n):
    return 2.0 + math.sqrt(2.0 * n)


def seeger_langford(emp, dep, n, beta):
    budget = (dep + math.log(xi_conservative(n) / beta)) / n
    return kl_inverse_upper(emp, budget)


# ---------------------------------------------------------------------------
# relative-entropy / mutual-information upper bounds for eps-DP algorithms
# over a finite alphabet of size z (n is the sample count)

def simple_type(z, n):
    return (z - 1.0) * math.log(1.0 + n)


def hypercube_cover(eps, z, n):
    if eps <= 1.0:
        return (z - 1.0) * math.log(1.0 + math.e * eps * n)
    return simple_type(z, n)


def simplex_cover(eps, z, n):
    half_log = 0.5 * math.log(2.0 * math.pi * (z - 1.0))
    if eps <= 1.0 / n:
        return (z - 1.0) * (1.0 + eps * n) - half_log
    if eps <= 1.0:
        return ((z - 1.0) * math.log(1.0 + 2.0 * eps * n / (z - 1.0))
                + (z - 1.0) * math.log(math.e * math.e / 2.0) - half_log)
    return (z - 1.0) * math.log(1.0 + n / (z - 1.0)) + (z - 1.0) - half_log


def typical_set(eps, z, n):
    if n < 2:
        return math.nan
    root = math.sqrt(n * math.log(n))
    if eps <= 2.0:
        return z * math.log(1.0 + math.e * eps * root) + 2.0 * z * eps / n
    return z * math.log(1.0 + 2.0 * root) + 2.0 * z * eps / n


# ---------------------------------------------------------------------------
# bounded-variance curves (chi-square relaxation vs the direct baselines)

KAPPA = math.e / (math.e - 1.0)


def variance_main(emp, chi2, n, beta, sigma2):
    cp = KAPPA * (1.1 * math.log1p(chi2)
                  + math.log(10.0 * math.e * math.pi * math.pi
                             * xi_conservative(n) / beta)) / n
    denom = 1.0 - 2.0 * math.sqrt(cp)
    if denom <= 0.0:
        return math.inf
    return (KAPPA * emp + 2.0 * math.sqrt(sigma2 * cp)) / denom


def variance_alquier(emp, chi2, n, beta, sigma2):
    return emp + math.sqrt(sigma2 * (chi2 + 1.0) / (n * beta))


def variance_ohnishi1(emp, chi2, n, beta, sigma2):
    return emp + math.sqrt(sigma2 * math.sqrt(chi2 + 1.0) / (n * beta))


def variance_ohnishi2(emp, chi2, n, beta, sigma2):
    return emp + math.sqrt((chi2 + (sigma2 / beta) ** 2) / (2.0 * n))


# ---------------------------------------------------------------------------
# grids (shared verbatim with the package's figure recipes)

def log_grid(lo, hi, points):
    a = math.log10(lo)
    b = math.log10(hi)
    return [10.0 ** (a + i * (b - a) / (points - 1)) for i in range(points)]


N_GRID = sorted(set(round(10.0 ** (k / 12.0)) for k in range(0, 49)))
EPS_GRID_PB = [10.0 ** (-4.0 + k / 12.0) for k in range(49)]
EPS_GRID_EXP = [10.0 ** (-4.0 + k / 12.0) for k in range(52)] + [2.0]
Z_GRID = sorted(set(round(10.0 ** (k / 12.0)) for k in range(4, 37)))

BETA_GRID = log_grid(1e-4, 0.5, 49)
CHI_GRID = log_grid(1.0, 1e5, 49)
NVAR_GRID = log_grid(10.0, 1e6, 49)
EMP_GRID = [i / 50.0 for i in range(51)]


def fmt(x):
    return format(x, ".17g")


def write_csv(path, name, header, rows):
    lines = ["# golden reference curves: " + name,
             "# generator: tools/make_golden.py (standalone re-derivation)",
             ",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    print("wrote %s (%d rows)" % (path, len(rows)))


# ---------------------------------------------------------------------------
# the three files

def build_variance(outdir):
    beta, chi2, emp, n, sigma2 = 0.025, 200.0, 0.025, 1e4, 1.0

    def row(tag, x, e, c, nn, b):
        return [tag, fmt(x),
                fmt(variance_alquier(e, c, nn, b, sigma2)),
                fmt(variance_ohnishi1(e, c, nn, b, sigma2)),
                fmt(variance_ohnishi2(e, c, nn, b, sigma2)),
                fmt(variance_main(e, c, nn, b, sigma2)),
                fmt(e)]

    rows = [row("caption", 0.0, emp, chi2, n, beta)]
    rows += [row("beta", b, emp, chi2, n, b) for b in BETA_GRID]
    rows += [row("chi2", c, emp, c, n, beta) for c in CHI_GRID]
    rows += [row("emp", e, e, chi2, n, beta) for e in EMP_GRID]
    rows += [row("n", nn, emp, chi2, nn, beta) for nn in NVAR_GRID]

    write_csv(outdir / "variance_bounds.csv", "variance_bounds",
              ["sweep", "x", "alquier", "ohnishi1", "ohnishi2", "main",
               "reference"], rows)

    # sanity: the relaxation must win somewhere in every sweep
    for tag, start in (("beta", 1), ("chi2", 50), ("emp", 99), ("n", 150)):
        wins = 0
        for r in rows:
            if r[0] != tag:
                continue
            main = float(r[5])
            if main < min(float(r[2]), float(r[3]), float(r[4])):
                wins += 1
        assert wins > 0, "no wins in sweep " + tag
        print("  %s sweep: main wins %d cells" % (tag, wins))


def build_dp_pacbayes(outdir):
    z, beta, emp = 100, 0.05, 0.05

    def row(panel, x, eps, n):
        return [panel, fmt(x),
                fmt(seeger_langford(emp, simple_type(z, n), n, beta)),
                fmt(seeger_langford(emp, hypercube_cover(eps, z, n), n, beta)),
                fmt(seeger_langford(emp, simplex_cover(eps, z, n), n, beta))]

    rows = [row("n", n, 0.1, n) for n in N_GRID]
    rows += [row("eps", e, e, 5000) for e in EPS_GRID_PB]

    write_csv(outdir / "dp_pacbayes.csv", "dp_pacbayes",
              ["panel", "x", "simple", "hypercube", "simplex"], rows)

    # sanity: cover beats the simple count at eps=0.1 < 1/e, and every
    # column decays with n
    prev = None
    for r in rows:
        if r[0] != "n":
            continue
        simple, hyper = float(r[2]), float(r[3])
        assert hyper < simple
        vals = (simple, hyper, float(r[4]))
        if prev is not None:
            assert all(v <= p + 1e-15 for v, p in zip(vals, prev))
        prev = vals
    print("  panel n: hypercube < simple everywhere, columns non-increasing")


def build_dp_expected(outdir):
    z, emp = 100, 0.05

    def row(panel, x, eps, n, zz):
        cols = [simple_type(zz, n), hypercube_cover(eps, zz, n),
                simplex_cover(eps, zz, n), typical_set(eps, zz, n),
                eps * n, 0.5 * n * eps * eps]
        out = [panel, fmt(x)]
        for mi in cols:
            if math.isnan(mi):
                out.append("nan")
            else:
                out.append(fmt(kl_inverse_upper(emp, mi / n)))
        out.append(fmt(emp + math.expm1(eps)))
        return out

    rows = [row("n", n, 0.6, n, z) for n in N_GRID]
    rows += [row("eps", e, e, 2500, z) for e in EPS_GRID_EXP]
    rows += [row("z", zz, 0.6, 2500, zz) for zz in Z_GRID]

    write_csv(outdir / "dp_expected.csv", "dp_expected",
              ["panel", "x", "simple", "hypercube", "simplex", "typical",
               "dwork", "bun", "stability"], rows)

    # sanity: baselines win at the small-n end, type-counting wins at the
    # large-n end
    by_n = [r for r in rows if r[0] == "n"]
    first, last = by_n[0], by_n[-1]

    def best_types(r):
        vals = [float(r[i]) for i in (2, 3, 4, 5)]
        return min(v for v in vals if not math.isnan(v))

    def best_base(r):
        return min(float(r[6]), float(r[7]), float(r[8]))

    assert best_base(first) < best_types(first)
    assert best_types(last) < best_base(last)
    print("  panel n: crossover confirmed (baselines first, types last)")


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "tests" / "golden")
    outdir.mkdir(parents=True, exist_ok=True)
    build_variance(outdir)
    build_dp_pacbayes(outdir)
    build_dp_expected(outdir)


if __name__ == "__main__":
    main()
