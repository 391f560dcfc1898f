import math
from fractions import Fraction

import pytest

from d3ap.divisor import coprime_sum, error_term, progression_sum, sieve_dk
from d3ap.experiments import (
    ScanConfig, averaged_report, averaged_scan, bfi_feasibility, check_lemma_6_4, scan_moduli,
    single_scan, unit_sweep,
)
from d3ap.ff_core import is_prime
from d3ap.windows import dyadic_window


def test_config_validation():
    with pytest.raises(ValueError):
        ScanConfig((10**5, 10**4), theta=0.5)
    with pytest.raises(ValueError):
        ScanConfig((10**4,), theta=0.995)
    with pytest.raises(ValueError):
        ScanConfig((10**4,), theta=0.5, a=0)
    with pytest.raises(ValueError):
        ScanConfig((10**4,), moduli=(91,))
    with pytest.raises(ValueError):
        ScanConfig((10**10,), theta=0.5)
    ScanConfig((10**4,), theta=0.99)


def test_single_record():
    recs = single_scan(ScanConfig((10**4,), moduli=(97,)))
    assert len(recs) == 1
    r = recs[0]
    t = sieve_dk(10**4)
    assert r.S == progression_sum(t, 97, 1)
    assert r.delta == r.S - Fraction(coprime_sum(t, 97), 96)
    assert r.row()[:4] == [10**4, 97, 1, r.S]


def test_theta_moduli_are_primes_up_to_x_theta():
    cfg = ScanConfig((10**4,), theta=0.5, a=6)
    qs = scan_moduli(cfg, 10**4)
    assert qs and all(is_prime(q) and 50 < q <= 100 and 6 % q for q in qs)
    with pytest.raises(ValueError):
        scan_moduli(ScanConfig((10**4,), moduli=(101,), theta=0.5), 10**4)


def test_unit_sweep_zero(d3_table_1e5):
    for q in (3, 97, 317):
        assert unit_sweep(d3_table_1e5, q) == 0
    assert sum((error_term(d3_table_1e5, 97, a).delta for a in range(1, 97)), Fraction(0)) == 0


def test_scan_is_thread_independent(d3_table_1e5):
    cfg1 = ScanConfig((10**5,), theta=0.5, threads=1)
    cfg4 = ScanConfig((10**5,), theta=0.5, threads=4)
    tables = {10**5: d3_table_1e5}
    assert single_scan(cfg1, tables) == single_scan(cfg4, tables)


def test_averaged_report_identities(d3_table_1e5):
    rep = averaged_report(d3_table_1e5, 10**(5 * 0.45), 1)
    assert rep.count == len(rep.signs) > 0
    assert rep.sum_abs_delta == rep.sigma0 - rep.sigma1
    assert abs(rep.sigma0 - rep.sigma1) <= rep.sum_abs_delta
    assert set(rep.signs) <= {-1, 0, 1}
    L = math.log(2 * 10**5)
    assert rep.scale == 10**5 / L


def test_averaged_periodicity_in_a(d3_table_1e5):
    Q = 40
    r1 = averaged_report(d3_table_1e5, Q, 1)
    qs = [q for q in range(41, 81) if is_prime(q)]
    for q in qs:
        assert error_term(d3_table_1e5, q, 1) == error_term(d3_table_1e5, q, 1 + q)
    assert r1.count == len(qs)


def test_averaged_skips_moduli_dividing_a(d3_table_1e5):
    rep = averaged_report(d3_table_1e5, 40, 43 * 47)
    assert rep.count == len([q for q in range(41, 81) if is_prime(q)]) - 2


def test_averaged_empty_range(d3_table_1e5):
    one = averaged_report(d3_table_1e5, 1.1, 1)  # (1.1, 2.2] holds only 2
    assert one.count == 1
    none = averaged_report(d3_table_1e5, 1.0, 2)  # 2 divides a
    assert none.count == 0 and none.sum_abs_delta == 0 and none.sigma0 == 0


def test_averaged_scan_smooth_convention(d3_table_1e5):
    reps = averaged_scan(ScanConfig((10**5,), q_exponents=(0.4, 0.45)), {10**5: d3_table_1e5})
    assert [round(r.Q, 6) for r in reps] == [round(10**(5 * 0.4), 6), round(10**(5 * 0.45), 6)]
    sm = reps[0].smooth
    assert abs(sm["sum_abs_delta"] - (sm["sigma0"] - sm["sigma1"])) < 1e-6 * sm["sum_abs_delta"]
    assert 0 <= sm["sign_agreement"] <= 1


def test_averaged_scan_is_bitwise_reproducible(d3_table_1e5):
    tables = {10**5: d3_table_1e5}
    a = averaged_scan(ScanConfig((10**5,), threads=1), tables)[0]
    b = averaged_scan(ScanConfig((10**5,), threads=3), tables)[0]
    assert a.row() == b.row() and a.smooth == b.smooth


def test_coprime_average_zero_sigma():
    c = check_lemma_6_4(0.0, [dyadic_window(8)] * 3, Q=20)
    assert (c.lhs, c.main, c.deviation) == (0.0, 0.0, 0.0)


def test_coprime_average_single_modulus_direct():
    Vs = [dyadic_window(M) for M in (4, 8, 8)]
    q = 7
    c = check_lemma_6_4({q: 1.0}, Vs)
    pts = [V.integer_points() for V in Vs]
    total = 0.0
    for m1 in pts[0]:
        for m2 in pts[1]:
            for m3 in pts[2]:
                if (m1 * m2 * m3) % q:
                    total += float(Vs[0](m1) * Vs[1](m2) * Vs[2](m3))
    assert abs(c.lhs - total / 6) < 1e-9 * total


def test_coprime_average_deviation_sublinear_in_M1():
    devs = []
    for M1 in (16, 32, 64):
        c = check_lemma_6_4(1.0, [dyadic_window(M1), dyadic_window(256), dyadic_window(256)], Q=20)
        devs.append(c.deviation / M1)
        assert c.ratio < 1
    assert devs[0] > devs[1] > devs[2]


def test_coprime_average_rejects_large_sigma():
    with pytest.raises(ValueError):
        check_lemma_6_4({7: 2.0}, [dyadic_window(4)] * 3)


def test_bfi_feasibility():
    f = bfi_feasibility(1e10, 1e5, 1e3, 1e2, 0.01)
    assert f.feasible and abs(f.lower - 0.36) < 1e-12 and f.upper == 0.99
    assert not bfi_feasibility(1e10, 1e2, 1e3, 1e2, 0.01).feasible
    assert not bfi_feasibility(1e10, 1e5, 1e6, 1e5, 0.01).qr_ok
