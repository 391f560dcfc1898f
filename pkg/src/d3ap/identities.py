"""Numerical checks of the exact summation identities.

Each check computes its two sides along separate code paths: the arithmetic
side is a direct finite sum over integers, the spectral side is a truncated
dual sum built from quadrature values of the window transforms.  Dual sums
are aggregated by residue class before being combined with the periodic
coefficients, which keeps triple dual sums at O(p^2) work.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from . import ff_core
from .ff_core import as_prime, characters, euler_phi, num_divisors
from .summation import csum
from .trace_fn import (
    PeriodicFunction,
    bbessel_table,
    fourier,
    kloosterman_table_direct,
    voronoi,
)
from .windows import (
    SmoothWindow,
    fourier_at_integers,
    fourier_continuous,
    tail_bound,
    truncation_index,
)


class TruncationError(RuntimeError):
    """The certified dual-sum tail could not be pushed below the tolerance."""


@dataclass
class IdentityCheck:
    name: str
    params: dict
    lhs: complex
    rhs: complex
    residual: float
    tail_bound: float

    def row(self):
        params = ";".join(f"{k}={v}" for k, v in self.params.items())
        lhs, rhs = complex(self.lhs), complex(self.rhs)
        return [self.name, params, lhs.real, lhs.imag, rhs.real, rhs.imag,
                self.residual, self.tail_bound]


CSV_HEADER = ["identity", "params", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual", "tail_bound"]


@dataclass
class DualSum:
    """Truncated values V^(n/q), |n| <= N, with the certified tail beyond N."""

    window: SmoothWindow
    q: int
    N: int
    values: np.ndarray
    tail: float

    @property
    def n(self):
        return np.arange(-self.N, self.N + 1)

    @property
    def abs_mass(self):
        return float(np.sum(np.abs(self.values)))

    def at_zero(self):
        return self.values[self.N]

    def by_residue(self, modulus=None, exclude_zero=False):
        """F(r) = sum_{n = r mod modulus} V^(n/q), optionally skipping n = 0."""
        modulus = self.q if modulus is None else modulus
        vals = self.values.copy()
        if exclude_zero:
            vals[self.N] = 0
        r = self.n % modulus
        re = np.bincount(r, weights=vals.real, minlength=modulus)
        im = np.bincount(r, weights=vals.imag, minlength=modulus)
        return re + 1j * im

    def total(self, coprime_to=None):
        vals = self.values
        if coprime_to is not None:
            vals = vals[self.n % coprime_to != 0]
        return csum(vals)


def dual_sum(V: SmoothWindow, q: int, tol: float) -> DualSum:
    N = truncation_index(V, q, tol=tol)
    return DualSum(V, int(q), N, fourier_at_integers(V, q, N), tail_bound(V, q, N))


def _check_tail(bound, tol, name):
    if bound > tol / 10:
        raise TruncationError(f"{name}: tail bound {bound:.3g} exceeds tol/10 = {tol / 10:.3g}")


# --- Poisson -----------------------------------------------------------------------

def check_poisson(K: PeriodicFunction, V: SmoothWindow, tol: float = 1e-8) -> IdentityCheck:
    """sum_n K(n) V(n) against q^{-1/2} sum_m K^(m) V^(m/q)."""
    q = K.modulus
    m = V.integer_points()
    lhs = csum(K(m) * V(m))
    khat = fourier(K).values
    weight = max(float(np.abs(khat).max()), 1e-300) / math.sqrt(q)
    ds = dual_sum(V, q, tol / 10 / weight)
    rhs = csum(khat * ds.by_residue()) / math.sqrt(q)
    tail = weight * ds.tail
    _check_tail(tail, tol, "poisson")
    return IdentityCheck("poisson", {"q": q, "window": V.label, "N": ds.N},
                         lhs, rhs, abs(lhs - rhs), tail)


def check_poisson_progression(a: int, V: SmoothWindow, q: int, tol: float = 1e-8) -> IdentityCheck:
    """sum_{n = a mod q} V(n) against q^{-1} sum_m e(am/q) V^(m/q)."""
    q = int(q)
    m = V.integer_points()
    m = m[(m - a) % q == 0]
    lhs = csum(V(m))
    ds = dual_sum(V, q, tol / 10 * q)
    rhs = csum(characters(a * ds.n, q) * ds.values) / q
    tail = ds.tail / q
    _check_tail(tail, tol, "poisson-progression")
    return IdentityCheck("poisson-progression", {"q": q, "a": a, "window": V.label, "N": ds.N},
                         lhs, rhs, abs(lhs - rhs), tail)


# --- tempered Voronoi ---------------------------------------------------------------

def check_tempered_voronoi(K: PeriodicFunction, G, tol: float = 1e-7) -> IdentityCheck:
    """sum_{m,n} K(mn) G(m,n) for a product weight G(m, n) = V(m) W(n)."""
    V, W = G
    p = K.modulus
    m, n = V.integer_points(), W.integer_points()
    vm, wn = V(m), W(n)
    lhs = csum((K(np.multiply.outer(m, n)) * np.multiply.outer(vm, wn)).ravel())

    kv = voronoi(K).values
    khat0 = fourier(K).values[0]
    kmax = max(float(np.abs(kv).max()), 1e-300)
    dual_tol = tol / 10
    for _ in range(6):
        dv, dw = dual_sum(V, p, dual_tol), dual_sum(W, p, dual_tol)
        tail = kmax / p * (dv.tail * (dw.abs_mass + dw.tail) + dw.tail * dv.abs_mass)
        if tail <= tol / 10:
            break
        dual_tol *= 0.5 * (tol / 10) / tail
    _check_tail(tail, tol, "tempered-voronoi")
    fv, fw = dv.by_residue(), dw.by_residue()
    r = np.arange(p)
    kmat = kv[np.multiply.outer(r, r) % p]
    main = khat0 / math.sqrt(p) * V.integer_sum() * W.integer_sum()
    rhs = main + csum((kmat * np.multiply.outer(fv, fw)).ravel()) / p
    return IdentityCheck("tempered-voronoi",
                         {"p": p, "windows": f"{V.label}x{W.label}", "N": f"{dv.N}/{dw.N}"},
                         lhs, rhs, abs(lhs - rhs), tail)


# --- combined Poisson-Voronoi formula ---------------------------------------------------

@dataclass
class TripleSumReport:
    lhs: complex
    termA: complex
    termB: complex
    termC: complex
    termD: complex
    residual: float
    truncation: tuple  # (N1, N2, N3)
    tails: tuple  # certified tails of the three dual sums
    tail_bound: float  # resulting bound on the error of B + C + D
    params: dict = field(default_factory=dict)

    @property
    def rhs(self):
        return self.termA + self.termB + self.termC + self.termD

    def as_check(self):
        return IdentityCheck("poisson-voronoi", self.params, self.lhs, self.rhs,
                             self.residual, self.tail_bound)


def triple_sum_direct(Vs, K: PeriodicFunction) -> complex:
    """S(V; p, K) = sum_{m1,m2,m3 >= 1} V1(m1) V2(m2) V3(m3) K(m1 m2 m3)."""
    p = K.modulus
    pts = [V.integer_points() for V in Vs]
    vals = [V(m) for V, m in zip(Vs, pts)]
    prod = np.multiply.outer(np.multiply.outer(pts[0] % p, pts[1] % p) % p, pts[2] % p) % p
    w = np.multiply.outer(np.multiply.outer(vals[0], vals[1]), vals[2])
    return csum((w * K.values[prod]).ravel())


def compute_abcd(Vs, p, K: PeriodicFunction, tol: float = 1e-8,
                 bessel: np.ndarray | None = None) -> TripleSumReport:
    """Decompose S(V; p, K) into the four terms of the combined formula.

    ``bessel`` may carry a precomputed table of the two-variable transform
    (rows x, columns n) to avoid recomputing it for every call on the same K.
    """
    p = as_prime(p)
    if K.modulus != p:
        raise ValueError("K must have period p")
    if K.values[0] != 0:
        raise ValueError("K(0) must vanish: K has to be supported on units")
    V1, V2, V3 = Vs
    lhs = triple_sum_direct(Vs, K)

    khat0 = fourier(K).values[0]
    s1, s2, s3 = (V.integer_sum() for V in Vs)
    m1, m2 = V1.integer_points(), V2.integer_points()
    c1 = csum(V1(m1)[m1 % p != 0])
    c2 = csum(V2(m2)[m2 % p != 0])
    termA = khat0 / math.sqrt(p) * c1 * c2 * s3

    if bessel is None:
        bessel = bbessel_table(K)
    bmax = max(float(np.abs(bessel).max()), 1e-300)

    dual_tol = tol / 10
    for _ in range(6):
        ds = [dual_sum(V, p, dual_tol) for V in Vs]
        tail = _abcd_tail(ds, khat0, s1 * s2, bmax, p)
        if tail <= tol / 10:
            break
        dual_tol *= 0.5 * (tol / 10) / tail
    _check_tail(tail, tol, "poisson-voronoi")
    d1, d2, d3 = ds

    sum3_units = d3.total(coprime_to=p)
    termB = -khat0 / p**1.5 * s1 * s2 * sum3_units
    v1_0, v2_0 = d1.at_zero(), d2.at_zero()
    brace = v1_0 * d2.total() + v2_0 * d1.total() - v1_0 * v2_0
    termC = khat0 / p**2.5 * brace * sum3_units

    # D: group n1 n2 != 0 by residue of the product and n3 by residue
    f1 = d1.by_residue(exclude_zero=True)
    f2 = d2.by_residue(exclude_zero=True)
    f3 = d3.by_residue()
    f3[0] = 0.0
    r = np.arange(p)
    prod_idx = np.multiply.outer(r, r) % p
    g_re = np.bincount(prod_idx.ravel(), weights=np.multiply.outer(f1, f2).real.ravel(), minlength=p)
    g_im = np.bincount(prod_idx.ravel(), weights=np.multiply.outer(f1, f2).imag.ravel(), minlength=p)
    g = g_re + 1j * g_im
    termD = csum((np.multiply.outer(g, f3) * bessel).ravel()) / p**1.5

    rhs = termA + termB + termC + termD
    tails = [d.tail for d in ds]
    return TripleSumReport(
        lhs, termA, termB, termC, termD, abs(lhs - rhs),
        (d1.N, d2.N, d3.N), tuple(tails), tail,
        {"p": p, "windows": "/".join(V.label for V in Vs)},
    )


def _abcd_tail(ds, khat0, s12, bmax, p):
    """Bound on |B + C + D - truncated(B + C + D)| from the three dual tails."""
    A = [d.abs_mass for d in ds]
    t = [d.tail for d in ds]
    d_part = bmax / p**1.5 * (math.prod(a + e for a, e in zip(A, t)) - math.prod(A))
    b_part = abs(khat0) / p**1.5 * abs(s12) * t[2]
    v1, v2 = abs(ds[0].at_zero()), abs(ds[1].at_zero())
    brace = v1 * (A[1] + t[1]) + v2 * (A[0] + t[0]) + v1 * v2
    c_part = abs(khat0) / p**2.5 * ((v1 * t[1] + v2 * t[0]) * (A[2] + t[2]) + brace * t[2])
    return d_part + b_part + c_part


# --- the two-variable transform of delta_a ------------------------------------------

def check_lemma_1060(p) -> float:
    """max |K~(x, n) - Kl_3(a n x; p)/sqrt(p)| over K = delta_a and nonzero a, x, n."""
    p = as_prime(p)
    kl3 = kloosterman_table_direct(3, p)
    r = np.arange(1, p)
    worst = 0.0
    for a in range(1, p):
        table = bbessel_table(PeriodicFunction.delta(a, p))
        expect = kl3[(a * np.multiply.outer(r, r)) % p] / math.sqrt(p)
        worst = max(worst, float(np.abs(table[1:, 1:] - expect).max()))
    return worst


# --- coprimality sums --------------------------------------------------------------------

@dataclass
class CoprimeSumCheck:
    lhs: float
    main: float
    deviation: float
    divisor_count: int  # d(q); the deviation is measured against d(q) L^{2B}


def check_coprime_sum(V: SmoothWindow | None, u: int, q: int) -> CoprimeSumCheck:
    """sum_{(m, q) = 1} V(u m) against phi(q) / (q u) * V^(0)."""
    u, q = int(u), int(q)
    if u < 1 or q < 1:
        raise ValueError("u and q must be >= 1")
    if V is None:
        return CoprimeSumCheck(0.0, 0.0, 0.0, num_divisors(q))
    m = np.arange(math.floor(V.lo / u) + 1, math.ceil(V.hi / u) + 1, dtype=np.int64)
    m = m[np.gcd(m, q) == 1]
    lhs = csum(V(u * m))
    main = euler_phi(q) / (q * u) * fourier_continuous(V, 0.0).real
    return CoprimeSumCheck(lhs, main, abs(lhs - main), num_divisors(q))


# --- the phi identity ---------------------------------------------------------------------

def ordered_factorizations3(a: int):
    """All (d1, d2, d3) with d1 d2 d3 = a."""
    for d1 in ff_core.divisors(a):
        for d2 in ff_core.divisors(a // d1):
            yield d1, d2, a // (d1 * d2)


def check_phi_identity(a: int):
    """Exact sum over a = d1 d2 d3 of phi(d2 d3) phi(d3) / (d2 d3); returns (lhs, a)."""
    a = int(a)
    if a < 1:
        raise ValueError("a must be >= 1")
    lhs = sum(Fraction(euler_phi(d2 * d3) * euler_phi(d3), d2 * d3)
              for _, d2, d3 in ordered_factorizations3(a))
    return lhs, a
