"""Bilinear and trilinear sums of trace functions, measured against their envelopes.

The implied constants of the underlying estimates are not known, so nothing
here asserts an envelope; reports carry ratios.  Only the trivial bound and
the exact regrouping identity are hard checks.
"""

from dataclasses import dataclass
import math

import numpy as np

from .ff_core import as_prime
from .summation import csum
from .trace_fn import PeriodicFunction, kloosterman_table_direct
from .windows import SmoothWindow, fourier_at_integers, truncation_index

BILINEAR_ETA = 1 / 9
TRILINEAR_EPS = 0.05


@dataclass
class BilinearReport:
    p: int
    M1: float
    M2: float
    value: complex
    trivial_bound: float  # sum |V||W| sup|K|, never exceeded
    nominal_trivial: float  # M1 M2 sup|K|
    envelope: float  # Q M1 M2 (1 + p/(M1 M2))^(1/2) p^(-eta)

    @property
    def ratio_trivial(self):
        return abs(self.value) / self.nominal_trivial if self.nominal_trivial else 0.0

    @property
    def ratio_envelope(self):
        return abs(self.value) / self.envelope if self.envelope else 0.0

    def row(self):
        return [self.p, self.M1, self.M2, self.value.real, self.value.imag, abs(self.value),
                self.trivial_bound, self.nominal_trivial, self.envelope,
                self.ratio_trivial, self.ratio_envelope]


BILINEAR_HEADER = ["p", "M1", "M2", "re", "im", "abs", "trivial_bound", "nominal_trivial",
                   "envelope", "ratio_trivial", "ratio_envelope"]


def _scaled_points(V: SmoothWindow, M: float):
    m = np.arange(max(1, math.floor(V.lo * M)), math.ceil(V.hi * M) + 1, dtype=np.int64)
    w = V(m / M)
    keep = w != 0
    return m[keep], w[keep]


def bilinear_weights(V, W, M1, M2, p):
    """c[r] = sum over m1 m2 = r mod p of V(m1/M1) W(m2/M2), plus sum |V||W|."""
    m1, v = _scaled_points(V, M1)
    m2, w = _scaled_points(W, M2)
    r = np.multiply.outer(m1 % p, m2 % p) % p
    vw = np.multiply.outer(v, w)
    c = np.bincount(r.ravel(), weights=vw.ravel(), minlength=p)
    return c, float(np.sum(np.abs(vw)))


def bilinear_sum(K: PeriodicFunction, V: SmoothWindow, W: SmoothWindow, M1, M2) -> BilinearReport:
    """sum_{m1, m2} K(m1 m2) V(m1/M1) W(m2/M2) by direct double sum."""
    for U in (V, W):
        if U.lo < 0.5 or U.hi > 2:
            raise ValueError("windows must be supported in [1/2, 2]")
    p = K.modulus
    m1, v = _scaled_points(V, M1)
    m2, w = _scaled_points(W, M2)
    terms = np.multiply.outer(v, w) * K(np.multiply.outer(m1, m2))
    value = csum(terms.ravel())
    sup = float(np.abs(K.values).max())
    trivial = float(np.sum(np.abs(np.multiply.outer(v, w)))) * sup
    Q = max(V.derivative_scale, W.derivative_scale)
    env = Q * M1 * M2 * math.sqrt(1 + p / (M1 * M2)) * p ** (-BILINEAR_ETA)
    return BilinearReport(p, M1, M2, complex(value), trivial, M1 * M2 * sup, env)


def mean_normalized_bilinear(table: np.ndarray, V, W, M1, M2, p) -> float:
    """Mean over h != 0 of |sum K(h m1 m2) V W| / (M1 M2), K given as a table mod p."""
    c, _ = bilinear_weights(V, W, M1, M2, p)
    r = np.arange(p)
    vals = [abs(csum(c * table[r * h % p])) for h in range(1, p)]
    return math.fsum(vals) / (p - 1) / (M1 * M2)


# --- trilinear sums ----------------------------------------------------------------

@dataclass
class TrilinearReport:
    p: int
    N: tuple
    value: complex
    regrouped: complex  # same sum through beta_n = (alpha * beta)(n)
    trivial_bound: float
    nominal_trivial: float  # 2N1 2N2 2N3 sup|K|
    envelope: float

    @property
    def grouping_error(self):
        return abs(self.value - self.regrouped)

    @property
    def ratio_envelope(self):
        return abs(self.value) / self.envelope if self.envelope else 0.0

    def row(self):
        return [self.p, *self.N, self.value.real, self.value.imag, abs(self.value),
                self.grouping_error, self.trivial_bound, self.nominal_trivial,
                self.envelope, self.ratio_envelope]


TRILINEAR_HEADER = ["p", "N1", "N2", "N3", "re", "im", "abs", "grouping_error",
                    "trivial_bound", "nominal_trivial", "envelope", "ratio_envelope"]


def _coefficients(c, N):
    """Coefficient array indexed by n + N for n in [-N, N]; entry at n = 0 is ignored."""
    c = np.asarray(c, dtype=complex)
    if c.shape != (2 * N + 1,):
        raise ValueError(f"expected {2 * N + 1} coefficients")
    if np.abs(c).max(initial=0) > 1 + 1e-12:
        raise ValueError("coefficients must have modulus <= 1")
    c = c.copy()
    c[N] = 0
    return c


def trilinear_envelope(p, N1, N2, N3, eps=TRILINEAR_EPS):
    P = N1 * N2 * N3
    return math.sqrt(math.log(p)) * P ** (0.5 + eps) * math.sqrt(P / math.sqrt(p) + N1 * N2 + N3 * math.sqrt(p))


def trilinear_sum(K: PeriodicFunction, alpha, beta, gamma, N1, N2, N3) -> TrilinearReport:
    """sum over 1 <= |n_i| <= N_i, p not dividing n3, of alpha beta gamma K(n1 n2 n3).

    Coefficients are arrays over n = -N_i..N_i.  The result is also computed by
    grouping n1 n2 into one variable with coefficients (alpha * beta)(n).
    """
    p = K.modulus
    a = _coefficients(alpha, N1)
    b = _coefficients(beta, N2)
    g = _coefficients(gamma, N3)
    n1, n2, n3 = (np.arange(-N, N + 1) for N in (N1, N2, N3))
    g = np.where(n3 % p == 0, 0, g)

    # direct: one (n1, n2) plane per n3
    kv = K.values
    plane_idx = np.multiply.outer(n1, n2)
    ab = np.multiply.outer(a, b)
    direct = []
    for j in np.flatnonzero(g):
        direct.append(g[j] * csum((ab * kv[(plane_idx * n3[j]) % p]).ravel()))
    value = csum(np.array(direct, dtype=complex)) if direct else 0j

    # regrouped: beta'_n = sum_{n1 n2 = n} alpha(n1) beta(n2), a bilinear form in (n, n3)
    span = N1 * N2
    conv = np.zeros(2 * span + 1, dtype=complex)
    flat_n = plane_idx.ravel() + span
    conv += np.bincount(flat_n, weights=ab.real.ravel(), minlength=2 * span + 1)
    conv = conv + 1j * np.bincount(flat_n, weights=ab.imag.ravel(), minlength=2 * span + 1)
    n = np.arange(-span, span + 1)
    nz = np.flatnonzero(conv)
    grouped = []
    for j in np.flatnonzero(g):
        grouped.append(g[j] * csum(conv[nz] * kv[(n[nz] * n3[j]) % p]))
    regrouped = csum(np.array(grouped, dtype=complex)) if grouped else 0j

    sup = float(np.abs(kv).max())
    trivial = float(np.abs(a).sum() * np.abs(b).sum() * np.abs(g).sum()) * sup
    return TrilinearReport(p, (N1, N2, N3), complex(value), complex(regrouped), trivial,
                           8 * N1 * N2 * N3 * sup, trilinear_envelope(p, N1, N2, N3))


# --- the D term straight from Kloosterman values --------------------------------------------

def d_term_sum(Vs, p, a, caps=None, tol: float = 1e-11) -> complex:
    """D = p^-2 sum_{n1 n2 != 0, p not dividing n3} V1^ V2^ V3^ Kl_3(a n1 n2 n3; p).

    The dual sums over |n_i| <= caps[i] (default: truncation_index at ``tol``)
    are folded by residue, then summed against Kl_3 values directly.
    """
    p = as_prime(p)
    a = int(a) % p
    if a == 0:
        raise ValueError("a must be nonzero mod p")
    if caps is None:
        caps = [truncation_index(V, p, tol=tol) for V in Vs]
    folded = []
    for i, (V, N) in enumerate(zip(Vs, caps)):
        vals = fourier_at_integers(V, p, N)
        n = np.arange(-N, N + 1)
        # n1 n2 != 0 removes n1 = 0 and n2 = 0; p must not divide n3
        drop = (n == 0) if i < 2 else (n % p == 0)
        vals = np.where(drop, 0, vals)
        f = np.bincount(n % p, weights=vals.real, minlength=p) + 1j * np.bincount(
            n % p, weights=vals.imag, minlength=p)
        folded.append(f)
    f1, f2, f3 = folded
    kl3 = kloosterman_table_direct(3, p)
    r = np.arange(p)
    base = a * np.multiply.outer(r, r) % p
    f12 = np.multiply.outer(f1, f2)
    out = [f3[r3] * csum((f12 * kl3[base * r3 % p]).ravel()) for r3 in range(1, p)]
    return csum(np.array(out, dtype=complex)) / p**2
