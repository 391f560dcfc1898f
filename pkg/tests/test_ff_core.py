import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from d3ap.ff_core import (
    DegenerateInput, Prime, Residue, additive_character, characters, discrete_log_table,
    divisors, euler_phi, factorint, inverse_table, is_prime, mod_inverse, num_divisors,
    primes_in, primitive_root, roots_of_unity, squarefree_divisors,
)


def trial_division(n):
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def test_is_prime_matches_trial_division():
    assert [n for n in range(3000) if is_prime(n)] == [n for n in range(3000) if trial_division(n)]


def test_is_prime_large_known_values():
    assert is_prime(2**61 - 1)
    assert is_prime(18446744073709551557)  # largest prime below 2^64
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7
    assert not is_prime(3825123056546413051)
    assert not is_prime(2**64 - 1)


def test_primes_in_first_primes_above_a_million():
    ps = primes_in(10**6, 10**6 + 100)
    assert ps[0] == 1000003
    assert ps == [n for n in range(10**6, 10**6 + 101) if is_prime(n)]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**7), st.integers(1, 3000))
def test_primes_in_agrees_with_miller_rabin(lo, width):
    assert primes_in(lo, lo + width) == [n for n in range(lo, lo + width + 1) if is_prime(n)]


def test_prime_type_rejects_composites():
    with pytest.raises(ValueError):
        Prime(91)
    assert int(Prime(97)) == 97


def test_residue_reduces():
    r = Residue(-3, 7)
    assert r.value == 4 and r.modulus.value == 7


@given(st.sampled_from([2, 3, 5, 7, 97, 499, 1000003]), st.integers())
def test_mod_inverse_roundtrip(p, a):
    if a % p == 0:
        with pytest.raises(DegenerateInput):
            mod_inverse(a, p)
    else:
        assert a * mod_inverse(a, p) % p == 1


def test_mod_inverse_of_residue():
    assert mod_inverse(Residue(3, 7)) == 5


def test_inverse_table():
    p = 101
    inv = inverse_table(p)
    assert all(a * int(inv[a]) % p == 1 for a in range(1, p))


def test_roots_and_characters():
    p = 13
    r = roots_of_unity(p)
    assert abs(r.sum()) < 1e-12
    assert abs(additive_character(3, p) - np.exp(2j * np.pi * 3 / p)) < 1e-15
    assert np.allclose(characters(np.array([1, 14, -12]), p), r[1])


def test_primitive_root_and_logs():
    for p in (2, 3, 7, 97, 499):
        g = primitive_root(p)
        assert len({pow(g, e, p) for e in range(p - 1)}) == p - 1
        powers, logs = discrete_log_table(p)
        assert all(pow(g, int(logs[a]), p) == a for a in range(1, p))
        assert all(int(powers[e]) == pow(g, e, p) for e in range(p - 1))


def test_arithmetic_functions():
    assert factorint(360) == ((2, 3), (3, 2), (5, 1))
    assert euler_phi(1) == 1 and euler_phi(97) == 96 and euler_phi(360) == 96
    assert num_divisors(360) == 24
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert sorted(squarefree_divisors(12)) == [(1, 1), (2, -1), (3, -1), (6, 1)]


@given(st.integers(1, 5000))
def test_phi_and_divisors_by_brute_force(n):
    assert euler_phi(n) == sum(math.gcd(k, n) == 1 for k in range(1, n + 1))
    assert divisors(n) == [d for d in range(1, n + 1) if n % d == 0]
