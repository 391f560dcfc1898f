import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from d3ap.divisor import (
    DivisorTable, all_progression_sums, coprime_sum, decompose_lemma964, error_term,
    progression_sum, sieve_dk, smooth_coprime_sum, smooth_full_sum, smooth_triple_sum,
    smooth_weight_table, total_sum,
)
from d3ap.ff_core import factorint
from d3ap.windows import dyadic_window


def spf_dk(x, k):
    """d_k via a smallest-prime-factor sieve and the prime-power formula."""
    spf = np.zeros(x + 1, dtype=np.int64)
    for i in range(2, x + 1):
        if spf[i] == 0:
            spf[i::i][spf[i::i] == 0] = i
    out = [0, 1]
    for n in range(2, x + 1):
        m, val = n, 1
        while m > 1:
            p, e = spf[m], 0
            while m % p == 0:
                m //= p
                e += 1
            val *= math.comb(e + k - 1, k - 1)
        out.append(val)
    return np.array(out)


def test_small_values():
    t = sieve_dk(100, 3)
    assert t[1] == 1 and t[2] == 3 and t[4] == 6 and t[12] == 18 and t[30] == 27
    assert sieve_dk(100, 2)[12] == 6


@pytest.mark.parametrize("k", [2, 3, 4])
def test_sieve_matches_spf_oracle(k):
    x = 20000
    assert np.array_equal(sieve_dk(x, k).values.astype(np.int64), spf_dk(x, k))


def test_sieve_matches_factorization_formula():
    t = sieve_dk(5000, 3)
    for n in range(1, 5001, 7):
        assert t[n] == math.prod(math.comb(e + 2, 2) for _, e in factorint(n))


@settings(max_examples=50)
@given(m=st.integers(1, 316), n=st.integers(1, 316))
def test_multiplicative(d3_table_1e5, m, n):
    t = d3_table_1e5
    if math.gcd(m, n) == 1:
        assert t[m * n] == t[m] * t[n]


def test_hyperbola_small():
    x = 5000
    count = sum(x // (a * b) for a in range(1, x + 1) for b in range(1, x // a + 1))
    assert total_sum(sieve_dk(x, 3)) == count


def test_sieve_rejects_bad_arguments():
    with pytest.raises(ValueError):
        sieve_dk(0)
    with pytest.raises(ValueError):
        sieve_dk(10**10)
    with pytest.raises(ValueError):
        sieve_dk(100, 5)


def test_cache_roundtrip(tmp_path):
    t = sieve_dk(1000, 3)
    path = tmp_path / "d3.bin"
    t.save(path)
    raw = path.read_bytes()
    assert raw[:4] == b"DKT1" and len(raw) == 16 + 4 * 1000
    u = DivisorTable.load(path)
    assert u.limit == 1000 and u.k == 3 and np.array_equal(u.values, t.values)
    path.write_bytes(raw[:-4])
    with pytest.raises(ValueError):
        DivisorTable.load(path)


def test_progression_sums(d3_table_1e5):
    t = d3_table_1e5
    q = 97
    n = np.arange(1, t.limit + 1)
    v = t.values[1:].astype(np.int64)
    for a in (1, 5, 96):
        assert progression_sum(t, q, a) == int(v[n % q == a].sum())
    assert coprime_sum(t, q) == int(v[n % q != 0].sum())
    sums = all_progression_sums(t, q)
    assert int(sums[1:].sum()) == coprime_sum(t, q)
    assert int(sums.sum()) == total_sum(t)
    with pytest.raises(ValueError):
        progression_sum(t, q, 0)


def test_error_term_exact(d3_table_1e5):
    t = d3_table_1e5
    rec = error_term(t, 97, 1)
    assert rec.main == Fraction(coprime_sum(t, 97), 96)
    assert rec.delta == rec.S - rec.main
    total = sum((error_term(t, 97, a).delta for a in range(1, 97)), Fraction(0))
    assert total == 0
    assert error_term(t, 97, 1 + 97) == rec


def test_smooth_sums():
    Vs = [dyadic_window(M) for M in (4, 8, 8)]
    q = 7
    by_class = [smooth_triple_sum(Vs, q, a) for a in range(1, q)]
    assert abs(math.fsum(by_class) - smooth_coprime_sum(Vs, q)) < 1e-9
    w = smooth_weight_table(Vs)
    assert abs(math.fsum(w) - smooth_full_sum(Vs)) < 1e-8
    n = np.arange(len(w))
    assert abs(math.fsum(w[n % q == 3]) - smooth_triple_sum(Vs, q, 3)) < 1e-9


def test_decomposition_bounded_by_boundary(d3_table_1e5):
    d = decompose_lemma964(10**4, 101, 1, B=2, table=d3_table_1e5)
    assert abs(d.residual) <= d.boundary_mass
    assert d.direct == progression_sum(sieve_dk(10**4), 101, 1)
    assert d.reconstruction_window <= d.reconstruction + 1e-9


def test_decomposition_is_linear_in_the_class(d3_table_1e5):
    x, q = 3000, 11
    parts = [decompose_lemma964(x, q, a, B=1, table=d3_table_1e5).reconstruction for a in range(1, q)]
    whole = decompose_lemma964(x, q, None, B=1, table=d3_table_1e5).reconstruction
    assert abs(math.fsum(parts) - whole) < 1e-8 * whole
