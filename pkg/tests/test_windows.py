import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from d3ap.windows import (
    ExponentProfile, Region, SmoothWindow, decay_envelope, dyadic_window, fourier_at_integers,
    fourier_continuous, fourier_gauss, mother_bump, partition, partition_sum, piece_window,
    region_check, region_detail, smooth_step, tail_bound, truncation_index,
)


def test_smooth_step_shape():
    t = np.linspace(-1, 2, 3001)
    s = smooth_step(t)
    assert np.all(s[t <= 0] == 0) and np.all(s[t >= 1] == 1)
    assert abs(smooth_step(0.5) - 0.5) < 1e-15
    assert np.all(np.diff(s) >= 0)
    # s(t) + s(1 - t) = 1
    assert np.abs(s + smooth_step(1 - t) - 1).max() < 1e-15


def test_window_vanishes_outside_support():
    V = dyadic_window(8)
    assert (V.lo, V.hi) == (4, 16)
    t = np.array([0.0, 3.9, 4.0, 16.0, 20.0])
    assert np.all(V(t) == 0)
    assert V(8.0) == 1.0


def test_piece_relations():
    # b_ell(t) = b_0(t / delta^ell)
    for delta in (2.0, 1.1):
        b0 = piece_window(0, delta)
        for ell in (1, 5):
            b = piece_window(ell, delta)
            t = np.exp(np.linspace(math.log(b.lo), math.log(b.hi), 200))
            assert np.abs(b(t) - b0(t / delta**ell)).max() < 1e-12


@pytest.mark.parametrize("delta", [2.0, 1.1, 1.01])
def test_partition_of_unity(delta):
    ell_max = math.ceil(math.log(1e4) / math.log(delta)) + 2
    xi = np.exp(np.linspace(0, math.log(1e4), 2000))
    assert np.abs(partition_sum(delta, ell_max, xi) - 1).max() <= 1e-12
    assert len(partition(delta, ell_max)) == ell_max + 1


def test_mother_bump():
    V = mother_bump(2.0)
    assert V(1.5) == 1.0 and V(0.5) == 0 and V(4.0) == 0


def test_window_validation():
    with pytest.raises(ValueError):
        SmoothWindow(2.0, 1.0, lambda t: t)
    with pytest.raises(ValueError):
        piece_window(0, 1.0)


def test_trapezoid_matches_gauss_legendre():
    for M in (1, 4, 32):
        V = dyadic_window(M)
        xi = np.linspace(-3 / M, 3 / M, 13)
        assert np.abs(fourier_continuous(V, xi) - fourier_gauss(V, xi, panels=8)).max() < 1e-10 * M


def test_fourier_at_zero_is_integral():
    V = dyadic_window(16)
    t = np.linspace(V.lo, V.hi, 200001)
    area = np.trapezoid(V(t), t)
    assert abs(fourier_continuous(V, 0.0).real - area) < 1e-8


@pytest.mark.parametrize("q,M", [(7, 64), (11, 4), (101, 8)])
def test_fft_values_match_direct_quadrature(q, M):
    V = dyadic_window(M)
    N = 40
    fast = fourier_at_integers(V, q, N)
    slow = fourier_gauss(V, np.arange(-N, N + 1) / q, panels=16)
    assert np.abs(fast - slow).max() < 1e-10


def test_real_window_transform_is_hermitian():
    vals = fourier_at_integers(dyadic_window(8), 11, 30)
    assert np.abs(vals - np.conj(vals[::-1])).max() < 1e-12


def test_decay_envelope_dominates():
    V = dyadic_window(4)
    xi = np.linspace(0.5, 5, 40)
    vals = np.abs(fourier_continuous(V, xi))
    for nu in (1, 2, 4, 6):
        assert np.all(vals <= decay_envelope(V, xi, nu) * (1 + 1e-9) + 1e-14)


@pytest.mark.parametrize("q,M", [(11, 4), (101, 8), (7, 64)])
def test_tail_bound_is_certified(q, M):
    V = dyadic_window(M)
    N = truncation_index(V, q, tol=1e-9)
    assert tail_bound(V, q, N) <= 1e-9
    assert N == 1 or tail_bound(V, q, N - 1) > 1e-9
    vals = fourier_at_integers(V, q, 5 * N)
    n = np.arange(-5 * N, 5 * N + 1)
    assert np.abs(vals[np.abs(n) > N]).sum() <= tail_bound(V, q, N)


def test_truncation_cap():
    V = dyadic_window(101)
    free = truncation_index(V, 101)
    capped = truncation_index(V, 101, eta=0.05, x=101**2)
    assert capped == min(free, 2 * math.ceil(101 * (101**2) ** 0.05 / 101)) == 4


@settings(max_examples=40)
@given(st.floats(0.3, 0.7), st.floats(0.0, 0.6))
def test_region_verdict_matches_inequalities(kappa, mu3):
    mu = ((1 - mu3) / 2, (1 - mu3) / 2, mu3)
    if mu[0] > mu3:
        return
    prof = ExponentProfile(kappa, mu, eta=1e-3)
    e = 1e-3
    first = kappa <= 8 / 15 - 4 * e and mu3 >= 11 / 4 * kappa - 1 + 14 * e
    second = kappa <= 4 / 7 - e and 5 / 2 * kappa - 1 + 12 * e <= mu3 <= 2 - 3 * kappa - 12 * e
    expect = {(True, True): Region.BOTH, (True, False): Region.FIRST,
              (False, True): Region.SECOND, (False, False): Region.NEITHER}[(first, second)]
    assert region_check(prof) is expect


def test_region_examples():
    assert str(region_check(ExponentProfile(0.5217, (0.2826, 0.2826, 0.4348)))) == "Neither"
    assert region_check(ExponentProfile(0.3, (0.2, 0.3, 0.5))) is Region.BOTH
    d = region_detail(ExponentProfile(0.54, (0.3, 0.3, 0.365)))
    assert d.verdict is Region.SECOND and d.first_slack[0] < 0
    assert Region("Neither") is Region.NEITHER


def test_profile_validation():
    with pytest.raises(ValueError):
        ExponentProfile(0.5, (0.4, 0.3, 0.3))
    with pytest.raises(ValueError):
        ExponentProfile(0.5, (0.4, 0.4, 0.4))
    with pytest.raises(ValueError):
        ExponentProfile(0.999, (0.2, 0.3, 0.5))
