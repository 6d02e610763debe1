"""End-to-end acceptance gates.

Each test exercises one shipped guarantee at its stated tolerance and
emits exactly one PASS/FAIL line (visible with -s, and in the captured
output of any failure).  Several gates carry wall-clock budgets; those
are asserted too.  Everything random is seeded, so the whole module is
deterministic.
"""

import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import redirect_stdout

import numpy as np
import pytest
from scipy.special import ndtri

from ar1corr import cli
from ar1corr.asymptotics import (
    chaos_constants,
    kolmogorov_distance,
    mc_power,
    rate_fit,
)
from ar1corr.charpoly import (
    d_n,
    d_n_asymptotic_exponent,
    d_n_prime,
    d_n_sign_log,
    det_oracle,
)
from ar1corr.kernel_spectrum import (
    build_kernel,
    closed_product,
    quartic_sum_bound,
)
from ar1corr.mgf_moments import MgfInputs, phi_n
from ar1corr.simulation import (
    ModelSpec,
    empirical_stats,
    sample_theta,
    simulate_pair,
    substream,
)
from ar1corr.taylor_jet import variable

_THREADS = min(8, os.cpu_count() or 1)


def _report(num: int, ok: bool, detail: str, elapsed: float) -> None:
    verdict = "PASS" if ok else "FAIL"
    line = f"[criterion {num:02d}] {verdict} ({elapsed:6.1f}s) {detail}"
    print(line)
    assert ok, line


def _run_cli_table(which: str):
    buf = io.StringIO()
    with redirect_stdout(buf):
        rc = cli.main(["table", "--which", which])
    out = buf.getvalue()
    dev = None
    for line in out.splitlines():
        if line.startswith("# max_abs_dev: ") or line.startswith("# max_rel_dev: "):
            dev = float(line.split(": ")[1])
    return rc, dev, out


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def test_c01_second_moment_table():
    t0 = time.perf_counter()
    rc, dev, _ = _run_cli_table("second_moment")
    el = time.perf_counter() - t0
    ok = rc == 0 and el <= 300.0
    _report(1, ok, f"second-moment table rc={rc} max_abs_dev={dev:.2e} "
                   f"(tol 2e-4 cells, 1e-6 limit, 300s budget)", el)


def test_c02_independent_moment_table():
    t0 = time.perf_counter()
    rc, dev, _ = _run_cli_table("independent_moments")
    el = time.perf_counter() - t0
    ok = rc == 0 and el <= 600.0
    _report(2, ok, f"even-moment table rc={rc} max_rel_dev={dev:.2e} "
                   f"(per-cell rel tol, 600s budget)", el)


def test_c03_correlated_moment_table():
    t0 = time.perf_counter()
    rc, dev, _ = _run_cli_table("correlated_moments")
    el = time.perf_counter() - t0
    ok = rc == 0
    _report(3, ok, f"correlated-moment table rc={rc} max_rel_dev={dev:.2e}",
            el)


def test_c04_charpoly_against_determinant_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(410)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 201))
        a = float(rng.uniform(-0.95, 0.95))
        # the range endpoint only needs the top eigenvalue; LAPACK keeps
        # this setup step out of the timing budget
        lam_max = float(np.linalg.eigvalsh(build_kernel(n, a).entries)[-1])
        lam = float(rng.uniform(-50.0, 0.5 / lam_max))
        worst = max(worst, _rel(d_n(n, a, lam), det_oracle(n, a, lam)))
    el = time.perf_counter() - t0
    ok = worst <= 1e-9 and el <= 60.0
    _report(4, ok, f"d_n vs elimination oracle, 200 random triples, "
                   f"worst rel dev {worst:.2e} (tol 1e-9, 60s budget)", el)


def test_c05_spectral_identities_and_bounds():
    t0 = time.perf_counter()
    alphas = (-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9)
    checked = 0
    min_geo = math.inf
    max_margin = 0.0
    for n in range(2, 101):
        for a in alphas:
            s4, bound = quartic_sum_bound(n, a)   # raises on violation
            cp = closed_product(n, a)             # raises below 1/4
            min_geo = min(min_geo, cp.geometric_mean_stat)
            max_margin = max(max_margin, s4 / bound)
            checked += 1
    el = time.perf_counter() - t0
    ok = checked == 99 * 7
    _report(5, ok, f"{checked} (n, alpha) pairs: quartic sum <= C3/n^3 "
                   f"(max ratio {max_margin:.3f}), (n-1)*geomean >= 1/4 "
                   f"(min {min_geo:.4f}), zero violations", el)


def test_c06_derivative_against_order1_jet():
    t0 = time.perf_counter()
    rng = np.random.default_rng(620)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 151))
        a = float(rng.uniform(-0.9, 0.9))
        lam_max = float(np.linalg.eigvalsh(build_kernel(n, a).entries)[-1])
        lam = float(rng.uniform(-20.0, 0.4 / lam_max))
        jet = d_n(n, a, variable(lam, order=1))
        worst = max(worst, _rel(d_n_prime(n, a, lam),
                                float(jet.coeffs[..., 1])))
    el = time.perf_counter() - t0
    ok = worst <= 1e-9
    _report(6, ok, f"d_n_prime vs order-1 jet, 500 random points, "
                   f"worst rel dev {worst:.2e} (tol 1e-9)", el)


def test_c07_mgf_normalization_and_parity():
    t0 = time.perf_counter()
    one = phi_n(30, 0.1, MgfInputs(0.0, 0.0, 0.0))
    dev_diag = 0.0
    for n in (2, 5, 30):
        for a in (-0.3, 0.0, 0.1, 0.5):
            for s in (0.1, 1.0, 10.0):
                lhs = phi_n(n, a, MgfInputs(s, 0.0, 0.0))
                rhs = d_n(n, a, -s) ** -0.5
                dev_diag = max(dev_diag, _rel(lhs, rhs))
    odd_max = 0.0
    for s, tt in ((0.7, 1.9), (1.3, 1.3), (4.0, 0.2)):
        jet = phi_n(30, 0.1, MgfInputs(s, variable(0.0, order=9), tt))
        odd = np.asarray(jet.coeffs)[..., 1::2]
        odd_max = max(odd_max, float(np.max(np.abs(odd))))
    el = time.perf_counter() - t0
    ok = one == 1.0 and dev_diag <= 1e-12 and odd_max <= 1e-13
    _report(7, ok, f"phi(0)={one!r}, phi(s,0,0) vs d_n(-s)^-1/2 dev "
                   f"{dev_diag:.2e}, odd jet coeffs {odd_max:.2e}", el)


def test_c08_monte_carlo_attains_exact_second_moment():
    t0 = time.perf_counter()
    spec = ModelSpec("gaussian_independent", 10, 0.1)
    out = sample_theta(spec, 1_000_000, seed=812, threads=_THREADS)
    stat = 10.0 * out.values ** 2
    mhat = float(np.mean(stat))
    se = float(np.std(stat) / math.sqrt(stat.size))
    ref = 1.122613
    el = time.perf_counter() - t0
    ok = abs(mhat - ref) <= 4.0 * se and el <= 120.0
    _report(8, ok, f"1e6-rep MC mean {mhat:.6f} vs {ref} "
                   f"({abs(mhat - ref) / se:.2f} se, 4 allowed, "
                   f"120s budget)", el)


def test_c09_distance_decay_rate():
    t0 = time.perf_counter()
    ns = (50, 100, 200, 400, 800, 1600, 3200)
    template = ModelSpec("gaussian_independent", 50, 0.1)
    fk = rate_fit(template, ns, 100_000, 900, distance="kolmogorov",
                  threads=_THREADS)
    fw = rate_fit(template, ns, 100_000, 900, distance="wasserstein1",
                  threads=_THREADS)
    el = time.perf_counter() - t0
    ok = (-0.65 <= fk.slope <= -0.35 and fk.residual < 0.15
          and -0.65 <= fw.slope <= -0.35 and fw.residual < 0.15
          and el <= 900.0)
    _report(9, ok, f"slopes kol={fk.slope:.3f} w1={fw.slope:.3f} "
                   f"(window [-0.65,-0.35]), residuals "
                   f"{fk.residual:.3f}/{fw.residual:.3f} "
                   f"(<0.15), 900s budget", el)


def test_c10_correlated_family_centering_and_normality():
    t0 = time.perf_counter()
    spec = ModelSpec("gaussian_correlated", 1600, 0.1, r=0.3)
    raw = sample_theta(spec, 100_000, seed=1010, threads=_THREADS)
    mean = float(np.mean(raw.values))
    se = float(np.std(raw.values) / math.sqrt(raw.values.size))
    c = math.sqrt(0.99 / 1.01) / (1.0 - 0.09)
    scaled = c * math.sqrt(1600) * (raw.values - 0.3)
    dk = kolmogorov_distance(scaled)
    el = time.perf_counter() - t0
    ok = abs(mean - 0.3) <= 4.0 * se and dk <= 0.03
    _report(10, ok, f"mean {mean:.5f} vs r=0.3 "
                    f"({abs(mean - 0.3) / se:.2f} se), scaled "
                    f"Kolmogorov {dk:.4f} (<= 0.03)", el)


def test_c11_chaos_family_limit_variances():
    t0 = time.perf_counter()
    n, reps = 4000, 100_000
    spec = ModelSpec("second_chaos", n, 0.3, sigma=(1.0, 0.5),
                     tau=(1.0, 0.5))
    thetas = np.empty(reps)
    z12s = np.empty(reps)

    def run(lo, hi):
        for i in range(lo, hi):
            p = simulate_pair(spec, substream(1111, i))
            _, z12, _, th = empirical_stats(p)
            thetas[i] = th
            z12s[i] = z12

    bounds = np.linspace(0, reps, _THREADS + 1).astype(int)
    with ThreadPoolExecutor(max_workers=_THREADS) as pool:
        for f in [pool.submit(run, bounds[w], bounds[w + 1])
                  for w in range(_THREADS)]:
            f.result()

    cc = chaos_constants(0.3, 0.3, (1.0, 0.5), (1.0, 0.5))
    v_theta = n * float(np.var(thetas))
    target_theta = 1.09 / 0.91
    w = math.sqrt(n) * z12s
    v_z = float(np.var(w))
    target_z = 4.0 * cc.m3
    # the finite-n variance deviation obeys an explicit O(1/n) envelope;
    # allow four standard errors of the variance estimator on top
    envelope = cc.second_moment_bound(n)
    mu4 = float(np.mean((w - np.mean(w)) ** 4))
    se_var = math.sqrt((mu4 - v_z ** 2) / reps)
    dev_z = abs(v_z - target_z)
    el = time.perf_counter() - t0
    ok = (_rel(v_theta, target_theta) <= 0.03
          and _rel(v_z, target_z) <= 0.03
          and dev_z <= envelope + 4.0 * se_var)
    _report(11, ok, f"var(sqrt(n) theta)={v_theta:.4f} vs "
                    f"{target_theta:.4f}, var(sqrt(n) z12)={v_z:.4f} vs "
                    f"{target_z:.4f}, |dev| {dev_z:.4f} <= envelope "
                    f"{envelope:.4f} + 4se {4 * se_var:.4f}", el)


def test_c12_test_size_and_power():
    t0 = time.perf_counter()
    ca = float(-ndtri(0.025) * math.sqrt(1.01 / 0.99))
    size = mc_power(200, 0.1, 0.0, ca, reps=100_000, seed=1212,
                    threads=_THREADS)
    powers = [mc_power(n, 0.1, 0.3, ca, reps=100_000, seed=1213,
                       threads=_THREADS) for n in (100, 400, 1600)]
    el = time.perf_counter() - t0
    ok = (abs(size - 0.05) <= 0.005
          and powers[0] <= powers[1] <= powers[2]
          and powers[2] > 0.999)
    _report(12, ok, f"size {size:.4f} (0.05 +- 0.005), power "
                    f"{powers[0]:.4f} -> {powers[1]:.4f} -> "
                    f"{powers[2]:.4f} nondecreasing, final > 0.999", el)


def test_c13_charpoly_asymptotic_regime():
    t0 = time.perf_counter()
    n = 1_000_000
    worst = math.inf
    best = -math.inf
    for a in (0.0, 0.1, 0.5):
        for t in (0.5, 1.0, 2.0):
            lam = t * math.sqrt(n * math.log(n))
            sign, logmag = d_n_sign_log(n, a, lam)
            assert sign[0] > 0
            ratio = float(logmag[0]) / d_n_asymptotic_exponent(t, n, a)
            worst = min(worst, ratio)
            best = max(best, ratio)
    el = time.perf_counter() - t0
    ok = 0.98 <= worst and best <= 1.02
    _report(13, ok, f"log d_n over predicted exponent in "
                    f"[{worst:.5f}, {best:.5f}] (window [0.98, 1.02]) "
                    f"at n=1e6", el)
