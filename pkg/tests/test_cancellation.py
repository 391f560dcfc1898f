import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from d3ap.cancellation import (
    bilinear_sum, d_term_sum, mean_normalized_bilinear, trilinear_envelope, trilinear_sum,
)
from d3ap.identities import compute_abcd
from d3ap.trace_fn import KloostermanSpec, PeriodicFunction, sheaf_weight_function
from d3ap.windows import SmoothWindow, dyadic_window

UNIT = dyadic_window(1)  # supported in [1/2, 2]


def kl3(p, h=1):
    return sheaf_weight_function(KloostermanSpec(3, h, p))


def test_bilinear_zero_function():
    assert bilinear_sum(PeriodicFunction.constant(0, 11), UNIT, UNIT, 8, 8).value == 0


def test_bilinear_delta_counts_congruent_pairs():
    p, a, M1, M2 = 13, 5, 10, 20
    rep = bilinear_sum(PeriodicFunction.delta(a, p), UNIT, UNIT, M1, M2)
    total = 0.0
    for m1 in range(1, 2 * M1 + 1):
        for m2 in range(1, 2 * M2 + 1):
            if m1 * m2 % p == a:
                total += float(UNIT(m1 / M1) * UNIT(m2 / M2))
    assert abs(rep.value - total) < 1e-12


def test_bilinear_kl3_measurement():
    rep = bilinear_sum(kl3(101), UNIT, UNIT, 32, 32)
    assert abs(rep.value) <= rep.trivial_bound <= rep.nominal_trivial * 4
    assert abs(rep.value) <= 32 * 32
    assert 0 < rep.ratio_trivial < 1 and rep.envelope > 0


def test_bilinear_requires_unit_support():
    with pytest.raises(ValueError):
        bilinear_sum(kl3(11), dyadic_window(2), UNIT, 4, 4)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([11, 53, 101]), st.integers(0, 2**32 - 1),
       st.floats(2, 40), st.floats(2, 40))
def test_bilinear_trivial_bound_never_violated(p, seed, M1, M2):
    K = PeriodicFunction.random(p, np.random.default_rng(seed))
    rep = bilinear_sum(K, UNIT, UNIT, M1, M2)
    assert abs(rep.value) <= rep.trivial_bound * (1 + 1e-12)


def test_mean_bilinear_matches_per_shift_sums():
    p = 31
    K = kl3(p)
    M = math.sqrt(p)
    direct = [abs(bilinear_sum(kl3(p, h), UNIT, UNIT, M, M).value) for h in range(1, p)]
    fast = mean_normalized_bilinear(K.values, UNIT, UNIT, M, M, p)
    assert abs(fast - math.fsum(direct) / (p - 1) / (M * M)) < 1e-12


def test_cancellation_smoke_is_reported():
    """Soft check: the mean normalized sum should shrink with p; only warn otherwise."""
    means = []
    for p in (101, 211, 401):
        means.append(mean_normalized_bilinear(kl3(p).values, UNIT, UNIT, math.sqrt(p), math.sqrt(p), p))
    print("mean |sum|/(M1 M2):", dict(zip((101, 211, 401), means)))
    if not (means[0] > means[1] > means[2]):
        warnings.warn(f"no monotone decrease: {means}")  # flagged, not fatal
    assert all(0 < m < 1 for m in means)


def test_trilinear_zero_coefficients():
    N = (3, 4, 5)
    z = [np.zeros(2 * n + 1) for n in N]
    rep = trilinear_sum(kl3(11), *z, *N)
    assert rep.value == 0 and rep.regrouped == 0


def test_trilinear_ones_against_loops():
    p, N = 101, (8, 8, 16)
    K = kl3(p)
    ones = [np.ones(2 * n + 1) for n in N]
    rep = trilinear_sum(K, *ones, *N)
    total = 0j
    for n1 in range(-N[0], N[0] + 1):
        for n2 in range(-N[1], N[1] + 1):
            for n3 in range(-N[2], N[2] + 1):
                if n1 and n2 and n3 and n3 % p:
                    total += K(n1 * n2 * n3)
    assert abs(rep.value - total) < 1e-9
    assert abs(rep.value) <= 2 * N[0] * 2 * N[1] * 2 * N[2] * np.abs(K.values).max()
    assert rep.grouping_error <= 1e-10


def test_trilinear_excludes_multiples_of_p_in_n3():
    p, N = 7, (2, 2, 10)
    g = np.zeros(2 * N[2] + 1)
    g[N[2] + 7] = 1  # only n3 = 7
    rep = trilinear_sum(PeriodicFunction.constant(1, p), np.ones(5), np.ones(5), g, *N)
    assert rep.value == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.integers(1, 12), st.integers(1, 30))
def test_trilinear_grouping_identity(seed, N1, N2, N3):
    rng = np.random.default_rng(seed)
    coeffs = [np.exp(2j * np.pi * rng.random(2 * n + 1)) * rng.random(2 * n + 1) for n in (N1, N2, N3)]
    rep = trilinear_sum(kl3(101), *coeffs, N1, N2, N3)
    assert rep.grouping_error <= 1e-10
    assert abs(rep.value) <= rep.trivial_bound * (1 + 1e-12)


def test_trilinear_rejects_large_coefficients():
    with pytest.raises(ValueError):
        trilinear_sum(kl3(11), 2 * np.ones(3), np.ones(3), np.ones(3), 1, 1, 1)


def test_trilinear_envelope_formula():
    p, N = 101, (8, 8, 16)
    P = 8 * 8 * 16
    expect = math.sqrt(math.log(p)) * P**0.55 * math.sqrt(P / math.sqrt(p) + 64 + 16 * math.sqrt(p))
    assert abs(trilinear_envelope(p, *N) - expect) < 1e-9 * expect


def test_d_term_matches_combined_formula():
    p = 11
    Vs = [dyadic_window(M) for M in (4, 4, 8)]
    for a in range(1, p):
        rep = compute_abcd(Vs, p, PeriodicFunction.delta(a, p))
        assert abs(d_term_sum(Vs, p, a) - rep.termD) <= 1e-9


def test_d_term_zero_windows():
    zero = SmoothWindow(1.0, 4.0, lambda t: np.zeros_like(t))
    assert d_term_sum([zero, zero, zero], 11, 1, caps=(5, 5, 5)) == 0


def test_d_term_is_real_for_real_windows():
    # the ±a comparison is reported, not asserted: |D(a)| and |D(-a)| differ in general
    p = 11
    Vs = [dyadic_window(M) for M in (4, 4, 8)]
    for a in (1, 2, 3):
        for b in (a, -a):
            assert abs(d_term_sum(Vs, p, b).imag) < 1e-12
    print("D(1), D(-1):", d_term_sum(Vs, p, 1).real, d_term_sum(Vs, p, -1).real)
