"""Smooth compactly supported weights, the Delta-adic partition of unity,
continuous Fourier transforms by quadrature, and dual-sum truncation.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
import math

import numpy as np

TRAPEZOID_NODES = 1 << 12
GAUSS_NODES = 256
DEFAULT_TAIL_TOL = 1e-9
MAX_DERIVATIVE_ORDER = 12


def _sigma(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, s(1/2) = 1/2."""
    a = _sigma(t)
    b = _sigma(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


@dataclass(frozen=True, eq=False)
class SmoothWindow:
    """A smooth function vanishing outside [lo, hi].

    ``func`` must accept a float array.  ``derivative_scale`` is the constant
    Q with |xi^j V^(j)(xi)| << Q^j.
    """

    lo: float
    hi: float
    func: object
    derivative_scale: float = 1.0
    label: str = ""

    def __post_init__(self):
        if not (0 < self.lo < self.hi):
            raise ValueError("support must satisfy 0 < lo < hi")
        if self.derivative_scale < 1:
            raise ValueError("derivative_scale must be >= 1")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        inside = (t > self.lo) & (t < self.hi)
        if np.any(inside):
            out[inside] = self.func(t[inside])
        return out

    @property
    def length(self):
        return self.hi - self.lo

    def scaled(self, M):
        """t -> V(t / M), supported in [M lo, M hi]."""
        f = self.func
        return SmoothWindow(self.lo * M, self.hi * M, lambda t: f(t / M),
                            self.derivative_scale, f"{self.label}@{M:g}")

    def integer_points(self):
        """Integers strictly inside the support (where the window can be nonzero)."""
        return np.arange(math.floor(self.lo) + 1, math.ceil(self.hi), dtype=np.int64)

    def integer_sum(self):
        m = self.integer_points()
        return math.fsum(self(m).tolist())

    @cached_property
    def derivative_norms(self):
        """L1 norms of V^(nu) for nu = 0..MAX_DERIVATIVE_ORDER (spectral)."""
        return _spectral_l1_norms(self, MAX_DERIVATIVE_ORDER)


def mother_bump(delta: float = 2.0) -> SmoothWindow:
    """Equal to 1 on [1, delta], 0 outside [1/delta, delta^2]."""
    if delta <= 1:
        raise ValueError("delta must exceed 1")
    ld = math.log(delta)

    def f(t):
        u = np.log(t) / ld
        return smooth_step(u + 1.0) * (1.0 - smooth_step(u - 1.0))

    return SmoothWindow(1.0 / delta, delta * delta, f, _piece_scale(delta), "bump")


def _piece_scale(delta):
    return max(1.0, delta / (delta - 1.0))


@dataclass(frozen=True, eq=False)
class PartitionPiece:
    index: int
    delta: float
    window: SmoothWindow

    @property
    def scale(self):
        return self.delta ** self.index


def piece_window(ell: int, delta: float) -> SmoothWindow:
    """b_{ell, delta}(t) = s(log_delta t - (ell-1)) - s(log_delta t - ell)."""
    if delta <= 1:
        raise ValueError("delta must exceed 1")
    ld = math.log(delta)

    def f(t):
        u = np.log(t) / ld
        return smooth_step(u - (ell - 1)) - smooth_step(u - ell)

    return SmoothWindow(delta ** (ell - 1), delta ** (ell + 1), f,
                        _piece_scale(delta), f"b[{ell},{delta:g}]")


def partition(delta: float, ell_max: int) -> list:
    """Pieces b_{0..ell_max}; they sum to 1 on [1, delta^ell_max]."""
    if delta <= 1:
        raise ValueError("delta must exceed 1")
    return [PartitionPiece(ell, delta, piece_window(ell, delta)) for ell in range(ell_max + 1)]


def partition_sum(delta: float, ell_max: int, xi):
    """Sum of all pieces at xi; equals s(u+1) - s(u-ell_max) by telescoping."""
    xi = np.asarray(xi, dtype=float)
    return sum(p.window(xi) for p in partition(delta, ell_max))


def dyadic_window(M: float) -> SmoothWindow:
    """The Delta=2 piece at scale M, supported in [M/2, 2M].

    For M a power of two this is exactly b_{log2 M, 2}; otherwise the
    b_{0,2}-shape rescaled to M.
    """
    ell = round(math.log2(M))
    if 2**ell == M:
        return piece_window(ell, 2.0)
    base = piece_window(0, 2.0)
    return base.scaled(M)


def decay_envelope(V: SmoothWindow, xi, nu: int):
    """|V^(xi)| <= ||V^(nu)||_1 / (2 pi |xi|)^nu."""
    xi = np.abs(np.asarray(xi, dtype=float))
    return V.derivative_norms[nu] / (2 * np.pi * xi) ** nu


# --- quadrature -----------------------------------------------------------------

def _trapezoid_grid(V, n=TRAPEZOID_NODES):
    t = np.linspace(V.lo, V.hi, n + 1)
    return t, V(t), (V.hi - V.lo) / n


def fourier_continuous(V: SmoothWindow, xi, nodes: int = TRAPEZOID_NODES):
    """V^(xi) = int V(t) e(-t xi) dt by the composite trapezoid rule.

    Vectorized over ``xi``.  The endpoints carry zero weight since V vanishes
    there.
    """
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    t, v, h = _trapezoid_grid(V, nodes)
    mid = 0.5 * (V.lo + V.hi)
    out = np.empty(xi_arr.shape, dtype=complex)
    flat = xi_arr.ravel()
    res = out.reshape(-1)
    chunk = max(1, (1 << 22) // len(t))
    for i in range(0, len(flat), chunk):
        f = flat[i : i + chunk]
        # phases relative to the midpoint keep arguments small
        phase = np.exp(-2j * np.pi * np.outer(f, t - mid))
        res[i : i + chunk] = h * (phase @ v) * np.exp(-2j * np.pi * f * mid)
    return out[0] if np.ndim(xi) == 0 else out


def fourier_gauss(V: SmoothWindow, xi, nodes: int = GAUSS_NODES, panels: int = 1):
    """Oracle rule: Gauss-Legendre on ``panels`` equal panels of the support."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(V.lo, V.hi, panels + 1)
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    total = np.zeros(xi_arr.shape, dtype=complex)
    for a, b in zip(edges[:-1], edges[1:]):
        t = 0.5 * (b - a) * x + 0.5 * (a + b)
        wt = 0.5 * (b - a) * w * V(t)
        total += np.exp(-2j * np.pi * np.multiply.outer(xi_arr, t)) @ wt
    return total[0] if np.ndim(xi) == 0 else total


def fourier_at_integers(V: SmoothWindow, q: int, N: int, min_nodes: int = TRAPEZOID_NODES):
    """V^(n/q) for n = -N..N, as an array indexed by n + N.

    Same trapezoid rule as :func:`fourier_continuous`, but on a grid whose
    period is a multiple of q so that all frequencies n/q come out of one FFT.
    """
    q = int(q)
    # period m*q must exceed the support; frequency n/q is then bin n*m
    m = math.floor(V.length / q) + 1
    P = max(math.ceil(min_nodes * m * q / V.length), 2 * m * N + 2)
    P = 1 << (P - 1).bit_length()
    h = m * q / P
    j0 = math.floor(V.lo / h)
    j1 = math.ceil(V.hi / h)
    if j1 - j0 >= P:
        raise ValueError("grid period shorter than the support")
    j = np.arange(j0, j1 + 1)
    samples = np.zeros(P)
    np.add.at(samples, j % P, V(j * h))
    spec = np.fft.fft(samples) * h  # spec[k] = h sum_j V(t_j) e(-j k / P)
    n = np.arange(-N, N + 1)
    return spec[(n * m) % P]


# --- derivative norms and truncation ----------------------------------------------

def _spectral_l1_norms(V: SmoothWindow, nu_max: int):
    pad = 0.25 * V.length
    a, b = V.lo - pad, V.hi + pad
    L = b - a
    n = 1 << 13
    while True:
        t = a + L * np.arange(n) / n
        F = np.fft.rfft(V(t))
        mag = np.abs(F)
        tail = mag[int(0.8 * len(mag)):].max()
        if tail <= 1e-15 * mag.max() or n >= 1 << 22:
            break
        n <<= 1
    F[mag < 1e-15 * mag.max()] = 0
    k = np.fft.rfftfreq(n, d=L / n)
    norms = []
    for nu in range(nu_max + 1):
        d = np.fft.irfft(F * (2j * np.pi * k) ** nu, n=n)
        norms.append(float(np.sum(np.abs(d)) * L / n))
    return tuple(norms)


def tail_bound(V: SmoothWindow, q: float, N: int) -> float:
    """Bound for sum_{|n| > N} |V^(n/q)| from the derivative envelope."""
    if N <= 0:
        return math.inf
    best = math.inf
    for nu in range(2, MAX_DERIVATIVE_ORDER + 1):
        C = V.derivative_norms[nu]
        # sum_{n > N} n^{-nu} <= N^{1-nu} / (nu - 1)
        log_b = (math.log(2 * C) + nu * math.log(q / (2 * math.pi))
                 + (1 - nu) * math.log(N) - math.log(nu - 1))
        best = min(best, math.exp(min(log_b, 700.0)))
    return best


def truncation_index(V: SmoothWindow, q, eta: float | None = None, x: float | None = None,
                     tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest N whose certified tail bound is below ``tol``.

    With ``eta`` and ``x`` given, the result is capped at 2 * ceil(q x^eta / M),
    M being the upper end of the support over 2 (the window's scale).
    """
    q = float(int(q))
    if math.isinf(tol):
        return 0
    best = math.inf
    for nu in range(2, MAX_DERIVATIVE_ORDER + 1):
        C = V.derivative_norms[nu]
        if C == 0:
            return 0
        log_n = (math.log(2 * C) + nu * math.log(q / (2 * math.pi))
                 - math.log((nu - 1) * tol)) / (nu - 1)
        best = min(best, math.ceil(math.exp(min(log_n, 60.0))))
    N = max(int(best), 1)
    while N > 1 and tail_bound(V, q, N - 1) <= tol:
        N -= 1
    if eta is not None and x is not None:
        if eta <= 0:
            raise ValueError("eta must be positive")
        M = V.hi / 2
        cap = 2 * math.ceil(q * x**eta / M)
        N = min(N, cap)
    return N


# --- exponent region arithmetic ---------------------------------------------------

class Region(Enum):
    FIRST = "FirstEstimate"
    SECOND = "SecondEstimate"
    BOTH = "Both"
    NEITHER = "Neither"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ExponentProfile:
    kappa: float
    mu: tuple
    eta: float = 1e-3
    B: float = 1.0

    def __post_init__(self):
        m1, m2, m3 = self.mu
        if not (1 / 100 <= self.kappa <= 99 / 100):
            raise ValueError("kappa must lie in [1/100, 99/100]")
        if not (m1 <= m2 <= m3):
            raise ValueError("need mu1 <= mu2 <= mu3")
        if m1 + m2 + m3 > 1 + 1e-12:
            raise ValueError("need mu1 + mu2 + mu3 <= 1")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.B < 1:
            raise ValueError("B must be >= 1")


@dataclass(frozen=True)
class RegionDetail:
    verdict: Region
    first_slack: tuple  # (8/15 - 4 eta - kappa, mu3 - (11/4 kappa - 1 + 14 eta))
    second_slack: tuple  # (4/7 - eta - kappa, mu3 - lower, upper - mu3)


def region_detail(profile: ExponentProfile) -> RegionDetail:
    k, e = profile.kappa, profile.eta
    mu3 = profile.mu[2]
    first = (8 / 15 - 4 * e - k, mu3 - (11 / 4 * k - 1 + 14 * e))
    second = (4 / 7 - e - k, mu3 - (5 / 2 * k - 1 + 12 * e), (2 - 3 * k - 12 * e) - mu3)
    f_ok = all(s >= 0 for s in first)
    s_ok = all(s >= 0 for s in second)
    verdict = {(True, True): Region.BOTH, (True, False): Region.FIRST,
               (False, True): Region.SECOND, (False, False): Region.NEITHER}[(f_ok, s_ok)]
    return RegionDetail(verdict, first, second)


def region_check(profile: ExponentProfile) -> Region:
    return region_detail(profile).verdict
