"""p-periodic functions and their transforms.

Conventions, fixed exactly as used throughout the package:

* discrete Fourier transform  ``K^(n) = p^{-1/2} sum_h K(h) e(hn/p)``  (plus sign),
* continuous Fourier transform ``V^(xi) = int V(t) e(-t xi) dt``      (minus sign).

The two signs differ on purpose; ``K^^(n) = K(-n)`` with this normalization.
"""

from dataclasses import dataclass
from functools import lru_cache
import csv
import math

import numpy as np

from .ff_core import (
    Residue,
    as_prime,
    characters,
    discrete_log_table,
    inverse_table,
    roots_of_unity,
)
from .summation import Accumulator

# direct evaluation of Kl_k while p^(k-1) stays below this many terms
DIRECT_LIMIT = 10**6


@dataclass(frozen=True, eq=False)
class PeriodicFunction:
    """A complex function on Z/pZ; ``values[r]`` is the value at residue r."""

    modulus: int
    values: np.ndarray

    def __post_init__(self):
        p = as_prime(self.modulus)
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (p,):
            raise ValueError(f"expected {p} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "modulus", p)
        object.__setattr__(self, "values", vals)

    def __call__(self, n):
        return self.values[np.mod(n, self.modulus)]

    def __add__(self, other):
        self._check(other)
        return PeriodicFunction(self.modulus, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return PeriodicFunction(self.modulus, self.values - other.values)

    def scale(self, c):
        return PeriodicFunction(self.modulus, c * self.values)

    def _check(self, other):
        if other.modulus != self.modulus:
            raise ValueError("moduli differ")

    @classmethod
    def delta(cls, a, p):
        p = as_prime(p)
        v = np.zeros(p, dtype=complex)
        v[int(a) % p] = 1.0
        return cls(p, v)

    @classmethod
    def constant(cls, c, p):
        p = as_prime(p)
        return cls(p, np.full(p, c, dtype=complex))

    @classmethod
    def random(cls, p, rng):
        p = as_prime(p)
        return cls(p, rng.standard_normal(p) + 1j * rng.standard_normal(p))

    def to_csv(self, path_or_file):
        """Write columns residue, re, im (17 significant digits)."""
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["residue", "re", "im"])
            for r, v in enumerate(self.values):
                w.writerow([r, f"{v.real:.17g}", f"{v.imag:.17g}"])
        finally:
            if own:
                fh.close()


def _twisted_sum(values, p, phase):
    """out[n] = sum_h values[h] * e(phase(h, n) / p), h ascending, compensated."""
    roots = roots_of_unity(p)
    n = np.arange(p)
    acc = Accumulator(shape=(p,), dtype=complex)
    for h in range(p):
        c = values[h]
        if c != 0:
            acc.add(c * roots[phase(h, n) % p])
    return acc.value


def fourier(K: PeriodicFunction) -> PeriodicFunction:
    p = K.modulus
    out = _twisted_sum(K.values, p, lambda h, n: h * n) / math.sqrt(p)
    return PeriodicFunction(p, out)


def voronoi(K: PeriodicFunction) -> PeriodicFunction:
    """Voronoi transform: n -> p^{-1/2} sum_{h != 0} K^(h) e(n h^{-1} / p)."""
    p = K.modulus
    khat = fourier(K).values.copy()
    khat[0] = 0.0
    inv = inverse_table(p)
    out = _twisted_sum(khat, p, lambda h, n: n * inv[h]) / math.sqrt(p)
    return PeriodicFunction(p, out)


def voronoi_hyperbola(K: PeriodicFunction) -> np.ndarray:
    """Case-split form of the Voronoi transform, written independently.

    For p not dividing n: p^{-1/2} sum over factorizations h1 h2 = n mod p of
    K^(h1) e(h2/p); at n = 0 it is K(0) - K^(0)/sqrt(p).
    """
    p = K.modulus
    khat = fourier(K).values
    inv = inverse_table(p)
    roots = roots_of_unity(p)
    out = np.empty(p, dtype=complex)
    out[0] = K.values[0] - khat[0] / math.sqrt(p)
    h1 = np.arange(1, p)
    for n in range(1, p):
        h2 = n * inv[h1] % p
        out[n] = np.sum(khat[h1] * roots[h2]) / math.sqrt(p)
    return out


@dataclass(frozen=True)
class KloostermanSpec:
    rank: int
    shift: int
    modulus: int

    def __post_init__(self):
        p = as_prime(self.modulus)
        if isinstance(self.shift, Residue):
            object.__setattr__(self, "shift", self.shift.value)
        if int(self.rank) < 1:
            raise ValueError("rank must be >= 1")
        h = int(self.shift) % p
        if h == 0:
            raise ValueError("shift must be nonzero mod p")
        object.__setattr__(self, "modulus", p)
        object.__setattr__(self, "shift", h)
        object.__setattr__(self, "rank", int(self.rank))


def _direct_counts(k: int, p: int) -> np.ndarray:
    """Unnormalized Kl_k(a) for every a != 0 by enumerating x_1..x_{k-1}.

    The last variable is forced: x_k = a / (x_1 ... x_{k-1}).  Returns an
    array indexed by a with entry 0 left at zero.
    """
    roots = roots_of_unity(p)
    inv = inverse_table(p)
    units = np.arange(1, p)
    if k == 1:
        out = np.zeros(p, dtype=complex)
        out[1:] = roots[1:]
        return out
    # w[prod] = sum of e((x_1 + ... + x_j)/p) over unit tuples with that product
    w = np.zeros(p, dtype=complex)
    w[1:] = roots[1:]
    for _ in range(k - 2):
        nxt = np.zeros(p, dtype=complex)
        for x in range(1, p):
            # new product = prod * x
            idx = units * x % p
            nxt[idx] += w[units] * roots[x]
        w = nxt
    # x_k = a * prod^{-1}
    out = np.zeros(p, dtype=complex)
    for a in range(1, p):
        xk = a * inv[units] % p
        out[a] = np.sum(w[units] * roots[xk])
    return out


def _kl_zero(k: int, p: int) -> complex:
    """Unnormalized sum over tuples with product 0 mod p, by inclusion-exclusion.

    All tuples minus tuples of units; both computed from the root table.
    """
    roots = roots_of_unity(p)
    full = complex(np.sum(roots)) ** k
    units = complex(np.sum(roots[1:])) ** k
    return full - units


def kloosterman_direct(k: int, a: int, p: int) -> complex:
    """Kl_k(a; p) by direct enumeration of p^(k-1) terms (a may be 0)."""
    p = as_prime(p)
    a = int(a) % p
    if a == 0:
        raw = _kl_zero(k, p)
    else:
        raw = _direct_single(k, a, p)
    return raw / p ** ((k - 1) / 2)


def _direct_single(k: int, a: int, p: int) -> complex:
    roots = roots_of_unity(p)
    inv = inverse_table(p)
    if k == 1:
        return complex(roots[a])
    units = np.arange(1, p, dtype=np.int64)
    # iterate over x_1..x_{k-2} as an odometer; vectorize over x_{k-1}
    acc = Accumulator(dtype=complex)
    prefixes = [(1, 0)]
    for _ in range(k - 2):
        prefixes = [(pr * x % p, s + x) for pr, s in prefixes for x in range(1, p)]
    for pr, s in prefixes:
        last = a * inv[pr * units % p] % p
        acc.add(np.sum(roots[(s + units + last) % p]))
    return acc.value


def kloosterman(spec: KloostermanSpec, a) -> complex:
    """Kl_k(a h; p) for the rank k and shift h held by ``spec``.

    Small cases (p^(k-1) <= 10^6) are summed directly; larger ones are read off
    the convolution table.
    """
    k, h, p = spec.rank, spec.shift, spec.modulus
    if isinstance(a, Residue):
        a = a.value
    arg = int(a) * h % p
    if p ** (k - 1) <= DIRECT_LIMIT:
        return kloosterman_direct(k, arg, p)
    return complex(kloosterman_all(k, p)[arg])


@lru_cache(maxsize=32)
def _kloosterman_all_cached(k: int, p: int) -> np.ndarray:
    powers, _ = discrete_log_table(p)
    f = characters(powers, p)
    # cyclic convolution over exponents of the primitive root
    spec = np.fft.fft(f) ** k
    conv = np.fft.ifft(spec)
    out = np.empty(p, dtype=complex)
    out[powers] = conv
    out[0] = _kl_zero(k, p)
    out /= p ** ((k - 1) / 2)
    out.setflags(write=False)
    return out


def kloosterman_all(k: int, p) -> np.ndarray:
    """Kl_k(a; p) for every residue a, via k-fold multiplicative convolution.

    Entry 0 uses the literal definition (tuples with product 0).
    """
    if int(k) < 1:
        raise ValueError("k must be >= 1")
    return _kloosterman_all_cached(int(k), as_prime(p))


def kloosterman_table_direct(k: int, p) -> np.ndarray:
    """Direct-enumeration table of Kl_k(a; p) for all a, used as an oracle."""
    p = as_prime(p)
    out = _direct_counts(k, p)
    out[0] = _kl_zero(k, p)
    return out / p ** ((k - 1) / 2)


def bbessel_table(K: PeriodicFunction) -> np.ndarray:
    """T[x, n] = p^{-1/2} sum_{y != 0} K^(n y^{-1}) Kl_2(x y; p), y ascending."""
    p = K.modulus
    khat = fourier(K).values
    kl2 = kloosterman_all(2, p)
    inv = inverse_table(p)
    r = np.arange(p)
    acc = Accumulator(shape=(p, p), dtype=complex)
    for y in range(1, p):
        col_x = kl2[r * y % p]
        col_n = khat[r * inv[y] % p]
        acc.add(np.outer(col_x, col_n))
    return acc.value / math.sqrt(p)


def bbessel(K: PeriodicFunction, x, n) -> complex:
    """Two-variable transform K~(x, n) for a single pair."""
    p = K.modulus
    x = int(getattr(x, "value", x)) % p
    n = int(getattr(n, "value", n)) % p
    khat = fourier(K).values
    kl2 = kloosterman_all(2, p)
    inv = inverse_table(p)
    y = np.arange(1, p)
    terms = khat[n * inv[y] % p] * kl2[x * y % p]
    acc = Accumulator(dtype=complex)
    for t in terms:
        acc.add(t)
    return acc.value / math.sqrt(p)


def sheaf_weight_function(spec: KloostermanSpec) -> PeriodicFunction:
    """K(a) = (-1)^{k-1} Kl_k(a h; p) for a != 0 and K(0) = (-1)^k p^{-(k-1)/2}."""
    k, h, p = spec.rank, spec.shift, spec.modulus
    if k < 2:
        raise ValueError("the weight function needs k >= 2")
    table = kloosterman_all(k, p)
    a = np.arange(p)
    vals = (-1) ** (k - 1) * table[a * h % p]
    vals[0] = (-1) ** k * p ** (-(k - 1) / 2)
    return PeriodicFunction(p, vals)
