"""A fast invariant suite touching every module; each check yields CSV rows.

Rows hold no timings, so output depends only on the seed.
"""

import math

import numpy as np

from . import cancellation, divisor, experiments, ff_core, identities, trace_fn, windows
from .summation import csum

HEADER = ["module", "check", "params", "value", "threshold", "passed"]


def _row(module, check, params, value, threshold, passed=None):
    value = float(value)
    if passed is None:
        passed = value <= threshold
    return [module, check, params, value, float(threshold), bool(passed)]


def check_ff_core(seed):
    rows = []
    lo, hi = 10**6, 10**6 + 1999
    sieved = ff_core.primes_in(lo, hi)
    mr = [n for n in range(lo, hi + 1) if ff_core.is_prime(n)]
    rows.append(_row("ff_core", "sieve_vs_miller_rabin", f"[{lo},{hi}]", sieved != mr, 0))
    rng = np.random.default_rng(seed)
    worst = 0
    for p in (7, 97, 499):
        for a in rng.integers(1, p, 20):
            worst = max(worst, (int(a) * ff_core.mod_inverse(int(a), p) - 1) % p)
    rows.append(_row("ff_core", "inverse", "p=7,97,499", worst, 0))
    bad = 0
    for p in (7, 97, 499):
        g = ff_core.primitive_root(p)
        bad += len({pow(g, e, p) for e in range(p - 1)}) != p - 1
    rows.append(_row("ff_core", "primitive_root_order", "p=7,97,499", bad, 0))
    return rows


def check_trace_fn(seed):
    rows = []
    rng = np.random.default_rng(seed + 1)
    inv = pars = 0.0
    for p in (7, 97):
        for _ in range(10):
            K = trace_fn.PeriodicFunction.random(p, rng)
            F = trace_fn.fourier(K)
            FF = trace_fn.fourier(F)
            inv = max(inv, float(np.abs(FF.values - K(-np.arange(p))).max()))
            pars = max(pars, abs(np.sum(np.abs(F.values) ** 2) - np.sum(np.abs(K.values) ** 2)))
    rows.append(_row("trace_fn", "fourier_involution", "p=7,97", inv, 1e-12))
    rows.append(_row("trace_fn", "parseval", "p=7,97", pars, 1e-10))
    weil = 0.0
    for p in ff_core.primes_in(2, 60):
        for k in (2, 3):
            weil = max(weil, float(np.abs(trace_fn.kloosterman_all(k, p)[1:]).max()) - k)
    rows.append(_row("trace_fn", "weil_bound_excess", "p<60;k=2,3", max(weil, 0.0), 0))
    conv = 0.0
    for p in (5, 13, 31):
        for k in (2, 3, 4):
            conv = max(conv, float(np.abs(trace_fn.kloosterman_all(k, p)
                                          - trace_fn.kloosterman_table_direct(k, p)).max()))
    rows.append(_row("trace_fn", "kloosterman_all_vs_direct", "p=5,13,31;k=2..4", conv, 1e-10))
    K = trace_fn.PeriodicFunction.random(53, rng)
    vor = float(np.abs(trace_fn.voronoi(K).values - trace_fn.voronoi_hyperbola(K)).max())
    rows.append(_row("trace_fn", "voronoi_vs_hyperbola", "p=53", vor, 1e-12))
    return rows


def check_windows(seed):
    rows = []
    rng = np.random.default_rng(seed + 2)
    xi = np.exp(rng.uniform(0, math.log(1e6), 1000))
    for d in (2.0, 1.1):
        err = float(np.abs(windows.partition_sum(d, math.ceil(math.log(2e6) / math.log(d)) + 2, xi) - 1).max())
        rows.append(_row("windows", "partition_of_unity", f"delta={d}", err, 1e-12))
    V = windows.dyadic_window(16)
    t = rng.uniform(-2, 2, 8)
    quad = float(np.abs(windows.fourier_continuous(V, t) - windows.fourier_gauss(V, t, panels=8)).max())
    rows.append(_row("windows", "trapezoid_vs_gauss", "M=16", quad, 1e-9))
    N = windows.truncation_index(V, 11, tol=1e-9)
    vals = windows.fourier_at_integers(V, 11, 4 * N)
    n = np.arange(-4 * N, 4 * N + 1)
    actual = float(np.abs(vals[np.abs(n) > N]).sum())
    bound = windows.tail_bound(V, 11, N)
    rows.append(_row("windows", "tail_certified", f"q=11;N={N}", actual, bound))
    verdict = windows.region_check(windows.ExponentProfile(0.5217, (0.2826, 0.2826, 0.4348)))
    rows.append(_row("windows", "region_triple_neither", "kappa=0.5217;mu3=0.4348",
                     verdict is not windows.Region.NEITHER, 0))
    return rows


def check_identities(seed):
    rows = []
    rng = np.random.default_rng(seed + 3)
    V = windows.dyadic_window(8)
    K = trace_fn.PeriodicFunction.random(11, rng)
    c = identities.check_poisson(K, V)
    rows.append(_row("identities", "poisson", "p=11;M=8", c.residual, 1e-8))
    c = identities.check_poisson_progression(3, V, 11)
    rows.append(_row("identities", "poisson_progression", "q=11;a=3;M=8", c.residual, 1e-8))
    c = identities.check_tempered_voronoi(K, (windows.dyadic_window(4), windows.dyadic_window(8)))
    rows.append(_row("identities", "tempered_voronoi", "p=11;M=4,8", c.residual, 1e-7))
    Vs = [windows.dyadic_window(M) for M in (4, 4, 8)]
    bessel = {}
    worst = 0.0
    for a in range(1, 11):
        Ka = trace_fn.PeriodicFunction.delta(a, 11)
        r = identities.compute_abcd(Vs, 11, Ka)
        worst = max(worst, r.residual / max(1e-6 * abs(r.lhs), 1e-8))
        bessel[a] = r
    rows.append(_row("identities", "poisson_voronoi_relative", "p=11;M=4,4,8", worst, 1))
    rows.append(_row("identities", "delta_transform_vs_kl3", "p=13", identities.check_lemma_1060(13), 1e-10))
    bad = sum(identities.check_phi_identity(a)[0] != a for a in range(1, 201))
    rows.append(_row("identities", "phi_identity", "a<=200", bad, 0))
    return rows


def check_divisor(seed):
    rows = []
    x = 3000
    table = divisor.sieve_dk(x, 3)
    brute = np.zeros(x + 1, dtype=np.int64)
    for n in range(1, x + 1):
        brute[n] = sum(1 for _ in identities.ordered_factorizations3(n))
    rows.append(_row("divisor", "sieve_vs_factorizations", f"n<={x}",
                     int(np.abs(brute - table.values).max()), 0))
    x = 10**4
    table = divisor.sieve_dk(x, 3)
    count = sum(x // (m1 * m2) for m1 in range(1, x + 1) for m2 in range(1, x // m1 + 1))
    rows.append(_row("divisor", "hyperbola_count", f"x={x}", abs(divisor.total_sum(table) - count), 0))
    bad = 0
    for q in (3, 7, 97):
        sums = divisor.all_progression_sums(table, q)
        bad += int(sums[1:].sum()) != divisor.coprime_sum(table, q)
    rows.append(_row("divisor", "progression_partition", "x=1e4;q=3,7,97", bad, 0))
    d = divisor.decompose_lemma964(2000, 11, 1, B=2, table=table)
    rows.append(_row("divisor", "decomposition_residual", "x=2000;q=11;a=1;B=2",
                     abs(d.residual), d.boundary_mass))
    return rows


def check_cancellation(seed):
    rows = []
    rng = np.random.default_rng(seed + 4)
    K = trace_fn.sheaf_weight_function(trace_fn.KloostermanSpec(3, 1, 101))
    V = windows.dyadic_window(1)
    r = cancellation.bilinear_sum(K, V, V, 32, 32)
    rows.append(_row("cancellation", "bilinear_trivial_bound", "p=101;M=32,32",
                     abs(r.value) > r.trivial_bound, 0))
    N = (8, 8, 16)
    coeffs = [np.exp(2j * np.pi * rng.random(2 * n + 1)) for n in N]
    t = cancellation.trilinear_sum(K, *coeffs, *N)
    rows.append(_row("cancellation", "trilinear_grouping", "p=101;N=8,8,16", t.grouping_error, 1e-10))
    rows.append(_row("cancellation", "trilinear_trivial_bound", "p=101;N=8,8,16",
                     abs(t.value) > t.trivial_bound, 0))
    Vs = [windows.dyadic_window(M) for M in (4, 4, 8)]
    worst = 0.0
    for a in (1, 2, 5):
        rep = identities.compute_abcd(Vs, 11, trace_fn.PeriodicFunction.delta(a, 11))
        worst = max(worst, abs(cancellation.d_term_sum(Vs, 11, a) - rep.termD))
    rows.append(_row("cancellation", "d_term_vs_abcd", "p=11;a=1,2,5", worst, 1e-9))
    return rows


def check_experiments(seed):
    rows = []
    x = 10**5
    table = divisor.sieve_dk(x, 3)
    cfg = experiments.ScanConfig((x,), theta=0.45, check_every=1)
    recs = experiments.single_scan(cfg, tables={x: table})
    rows.append(_row("experiments", "single_scan_records", "x=1e5;theta=0.45", len(recs) == 0, 0))
    L = math.log(2 * x)
    worst = max(abs(r.normalized) for r in recs) / L**3
    rows.append(_row("experiments", "normalized_error_over_L3", "x=1e5;theta=0.45", worst, 1))
    rep = experiments.averaged_report(table, x**0.45, 1)
    rows.append(_row("experiments", "sum_abs_equals_sigma_split", "x=1e5;Q=x^0.45",
                     rep.sum_abs_delta != rep.sigma0 - rep.sigma1, 0))
    bad = 0
    for q in (101, 103, 107):
        bad += divisor.error_term(table, q, 5) != divisor.error_term(table, q, 5 + q)
    rows.append(_row("experiments", "periodicity_a_plus_q", "x=1e5;q=101..107", bad, 0))
    Vs = [windows.dyadic_window(M) for M in (8, 8, 16)]
    c = experiments.check_lemma_6_4({13: 1.0}, Vs)
    m = [V.integer_points() for V in Vs]
    w = [V(mi) for V, mi in zip(Vs, m)]
    direct = csum([a * b * cc for a, ma in zip(w[0], m[0]) for b, mb in zip(w[1], m[1])
                   for cc, mc in zip(w[2], m[2]) if (ma * mb * mc) % 13]) / 12
    rows.append(_row("experiments", "coprime_average_vs_direct", "q=13;M=8,8,16",
                     abs(c.lhs - direct), 1e-9 * abs(direct)))
    return rows


CHECKS = [check_ff_core, check_trace_fn, check_windows, check_identities,
          check_divisor, check_cancellation, check_experiments]


def run(seed: int = 0, threads: int = 1):
    """All rows, in fixed module order, whatever the thread count."""
    rows = []
    for part in experiments._pool_map(lambda f: f(seed), CHECKS, threads):
        rows.extend(part)
    return rows
