"""Divisor-function tables and sums of d_3 over arithmetic progressions."""

from dataclasses import dataclass
from fractions import Fraction
import math
import struct

import numpy as np

from .ff_core import as_prime, euler_phi
from .summation import csum
from .windows import piece_window

MAX_LIMIT = 10**9
CACHE_MAGIC = b"DKT1"


@dataclass(frozen=True, eq=False)
class DivisorTable:
    """values[n] = d_k(n) for 1 <= n <= limit; values[0] is unused and 0."""

    limit: int
    k: int
    values: np.ndarray

    def __getitem__(self, n):
        return self.values[n]

    def save(self, path):
        """Little-endian cache: 16-byte header (magic, k:u32, x:u64) then d_k(1..x) as u32."""
        with open(path, "wb") as fh:
            fh.write(CACHE_MAGIC + struct.pack("<IQ", self.k, self.limit))
            fh.write(self.values[1:].astype("<u4").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            head = fh.read(16)
            if len(head) != 16 or head[:4] != CACHE_MAGIC:
                raise ValueError("not a divisor table cache")
            k, x = struct.unpack("<IQ", head[4:])
            body = np.frombuffer(fh.read(), dtype="<u4")
        if body.size != x:
            raise ValueError("truncated divisor table cache")
        values = np.zeros(x + 1, dtype=np.uint32)
        values[1:] = body
        values.setflags(write=False)
        return cls(int(x), int(k), values)


def _convolve_with_ones(prev: np.ndarray, x: int) -> np.ndarray:
    """out[n] = sum_{d | n} prev[d] for n <= x."""
    out = np.zeros_like(prev)
    r = math.isqrt(x)
    for d in range(1, r + 1):
        out[d::d] += prev[d]
    for j in range(1, x // (r + 1) + 1):
        ds = np.arange(r + 1, x // j + 1)
        out[j * ds] += prev[ds]
    return out


def sieve_dk(x: int, k: int = 3) -> DivisorTable:
    """d_k(1..x) by k-1 Dirichlet convolutions of the all-ones sequence."""
    x, k = int(x), int(k)
    if not 1 <= x <= MAX_LIMIT:
        raise ValueError("limit must lie in [1, 10^9]")
    if k not in (2, 3, 4):
        raise ValueError("k must be 2, 3 or 4")
    values = np.ones(x + 1, dtype=np.uint32)
    values[0] = 0
    max_d2 = None
    for _ in range(k - 1):
        if max_d2 is not None and int(values.max()) * max_d2 >= 2**32:
            raise OverflowError("d_k values would overflow 32-bit counters")
        values = _convolve_with_ones(values, x)
        if max_d2 is None:
            max_d2 = int(values.max())
    values.setflags(write=False)
    return DivisorTable(x, k, values)


def _check_unit(q, a):
    q = as_prime(q)
    a = int(getattr(a, "value", a))
    if a % q == 0 or math.gcd(a, q) != 1:
        raise ValueError(f"{a} is not coprime to {q}")
    return q, a % q


def progression_sum(table: DivisorTable, q, a) -> int:
    """S(x; q, a) = sum_{n <= x, n = a mod q} d_k(n)."""
    q, a = _check_unit(q, a)
    return int(table.values[a::q].sum(dtype=np.int64))


def total_sum(table: DivisorTable) -> int:
    return int(table.values.sum(dtype=np.int64))


def coprime_sum(table: DivisorTable, q) -> int:
    """S*(x; q) = sum_{n <= x, (n, q) = 1} d_k(n)."""
    q = as_prime(q)
    return total_sum(table) - int(table.values[q::q].sum(dtype=np.int64))


def all_progression_sums(table: DivisorTable, q) -> np.ndarray:
    """S(x; q, r) for every residue r = 0..q-1 (r = 0 is the non-unit class)."""
    q = as_prime(q)
    v = table.values
    out = np.zeros(q, dtype=np.int64)
    n = len(v)
    full = (n // q) * q
    if full:
        out += v[:full].reshape(-1, q).sum(axis=0, dtype=np.int64)
    out[: n - full] += v[full:]
    return out


# --- smooth sums ---------------------------------------------------------------------

def _points(V):
    m = V.integer_points()
    return m, V(m)


def smooth_triple_sum(Vs, q, a) -> float:
    """S(M; q, a) = sum over m1 m2 m3 = a mod q of V1(m1) V2(m2) V3(m3)."""
    q, a = _check_unit(q, a)
    (m1, w1), (m2, w2), (m3, w3) = (_points(V) for V in Vs)
    prod = np.multiply.outer(np.multiply.outer(m1 % q, m2 % q) % q, m3 % q) % q
    w = np.multiply.outer(np.multiply.outer(w1, w2), w3)
    return csum(w[prod == a])


def smooth_full_sum(Vs) -> float:
    """S(M) = sum over all m1, m2, m3 of V1(m1) V2(m2) V3(m3)."""
    return math.prod(V.integer_sum() for V in Vs)


def smooth_coprime_sum(Vs, q) -> float:
    """S*(M, q): the triple sum restricted to (m1 m2 m3, q) = 1; it factorizes."""
    q = int(q)
    out = 1.0
    for V in Vs:
        m, w = _points(V)
        out *= csum(w[np.gcd(m, q) == 1])
    return out


def smooth_weight_table(Vs) -> np.ndarray:
    """w[n] = sum_{m1 m2 m3 = n} V1(m1) V2(m2) V3(m3), for n up to the largest product."""
    (m1, w1), (m2, w2), (m3, w3) = (_points(V) for V in Vs)
    top = int(m1[-1] * m2[-1] * m3[-1])
    out = np.zeros(top + 1)
    n12 = np.multiply.outer(m1, m2).ravel()
    v12 = np.multiply.outer(w1, w2).ravel()
    for m, w in zip(m3, w3):
        out += np.bincount(n12 * m, weights=v12 * w, minlength=top + 1)
    return out


# --- Delta-adic decomposition ----------------------------------------------------------------

@dataclass
class Decomposition:
    x: int
    q: int
    a: int | None
    B: float
    delta: float
    reconstruction: float  # sum of S(M; q, a) over triples with M1 M2 M3 <= x
    reconstruction_window: float  # the same, restricted to x L^-B <= M1 M2 M3 <= x
    direct: int  # S(x; q, a)
    residual: float
    boundary_mass: int  # d_3 mass of n = a mod q in (Delta^(Lam-3), Delta^(Lam+3)]
    envelope: float  # x q^-1 L^(2-B)


def _piece_weights(m: np.ndarray, delta: float):
    """For integers m >= 1: (ell0, b_ell0(m), b_{ell0+1}(m)); other pieces vanish at m."""
    u = np.log(m.astype(float)) / math.log(delta)
    ell0 = np.maximum(np.floor(u).astype(np.int64), 0)
    # b_ell(m) > 0 needs ell - 1 < u < ell + 1; ell0 = floor(u) and ell0 + 1 cover it
    w0 = np.empty(len(m))
    w1 = np.empty(len(m))
    cache = {}
    for ell in np.unique(ell0):
        sel = ell0 == ell
        for e, dest in ((ell, w0), (ell + 1, w1)):
            if e not in cache:
                cache[e] = piece_window(int(e), delta)
            dest[sel] = cache[e](m[sel].astype(float))
    return ell0, w0, w1


def decompose_lemma964(x: int, q, a, B: float, table: DivisorTable | None = None) -> Decomposition:
    """Rebuild S(x; q, a) from the smooth sums S(M; q, a), Delta = 1 + L^-B, L = log 2x.

    ``a=None`` decomposes the coprime sum S*(x; q) instead.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    x = int(x)
    q = as_prime(q)
    if a is not None:
        q, a = _check_unit(q, a)
    L = math.log(2 * x)
    delta = 1 + L ** (-B)
    lam = math.floor(math.log(x) / math.log(delta) + 1e-12)
    lo_mn = x * L ** (-B)
    top = math.floor(delta ** (lam + 3)) + 1
    m_all = np.arange(1, top + 1)
    ell0_all, w0_all, w1_all = _piece_weights(m_all, delta)

    recon = 0.0
    recon_win = 0.0
    parts = []
    parts_win = []
    log_delta = math.log(delta)
    for m1 in range(1, top + 1):
        for m2 in range(1, top // m1 + 1):
            hi3 = top // (m1 * m2)
            if hi3 < 1:
                break
            m3 = np.arange(1, hi3 + 1)
            n = m1 * m2 * m3
            if a is None:
                keep = n % q != 0
            else:
                keep = n % q == a
            if not keep.any():
                continue
            m3 = m3[keep]
            i1, i2 = m1 - 1, m2 - 1
            i3 = m3 - 1
            s0 = ell0_all[i1] + ell0_all[i2] + ell0_all[i3]
            # coefficients of prod_i (w0_i + w1_i z), z^j shifts the total level by j
            a1, b1 = w0_all[i1], w1_all[i1]
            a2, b2 = w0_all[i2], w1_all[i2]
            a3, b3 = w0_all[i3], w1_all[i3]
            c = (a1 * a2 * a3,
                 b1 * a2 * a3 + a1 * b2 * a3 + a1 * a2 * b3,
                 b1 * b2 * a3 + b1 * a2 * b3 + a1 * b2 * b3,
                 b1 * b2 * b3)
            for j in range(4):
                level = s0 + j
                ok = level <= lam
                parts.append(c[j][ok])
                win = ok & (level * log_delta >= math.log(lo_mn) - 1e-12)
                parts_win.append(c[j][win])
    recon = csum(np.concatenate(parts)) if parts else 0.0
    recon_win = csum(np.concatenate(parts_win)) if parts_win else 0.0

    if table is None or table.limit < top or table.k != 3:
        table = sieve_dk(top, 3)
    v = table.values
    idx = np.arange(1, x + 1)
    cls = (idx % q != 0) if a is None else (idx % q == a)
    direct = int(v[1 : x + 1][cls].sum(dtype=np.int64))
    b_lo = math.floor(delta ** (lam - 3))
    bidx = np.arange(b_lo + 1, top + 1)
    bcls = (bidx % q != 0) if a is None else (bidx % q == a)
    boundary = int(v[b_lo + 1 : top + 1][bcls].sum(dtype=np.int64))
    return Decomposition(x, q, a, B, delta, recon, recon_win, direct, recon - direct,
                         boundary, x / q * L ** (2 - B))


# --- error terms -----------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRecord:
    x: int
    q: int
    a: int
    S: int
    main: Fraction  # S*(x; q) / phi(q)
    delta: Fraction  # S - main, exact

    @property
    def normalized(self) -> float:
        return float(self.q * self.delta / self.x)

    def row(self):
        return [self.x, self.q, self.a, self.S, float(self.main), float(self.delta), self.normalized]


SCAN_HEADER = ["x", "q", "a", "S", "main", "delta", "norm_delta"]


def error_term(table: DivisorTable, q, a, star: int | None = None) -> ScanRecord:
    """Delta(x; q, a) = S(x; q, a) - S*(x; q) / phi(q), in exact arithmetic."""
    q, a = _check_unit(q, a)
    s = progression_sum(table, q, a)
    if star is None:
        star = coprime_sum(table, q)
    main = Fraction(star, euler_phi(q))
    return ScanRecord(table.limit, q, a, s, main, s - main)
