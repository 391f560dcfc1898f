"""Finite-field and elementary arithmetic primitives.

Moduli are plain Python ints, so products never overflow; the 64-bit range
limit only matters for the deterministic primality witnesses.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

MAX_MODULUS = 1 << 63

# Deterministic for every n < 2**64.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class DegenerateInput(ValueError):
    """Raised when an operation is asked to invert zero or a non-unit."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    if n >= 1 << 64:
        raise ValueError("primality certificate only valid below 2**64")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Prime:
    value: int

    def __post_init__(self):
        if not isinstance(self.value, (int, np.integer)) or not is_prime(int(self.value)):
            raise ValueError(f"{self.value!r} is not prime")
        object.__setattr__(self, "value", int(self.value))

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value


@dataclass(frozen=True)
class Residue:
    value: int
    modulus: Prime

    def __post_init__(self):
        m = self.modulus if isinstance(self.modulus, Prime) else Prime(self.modulus)
        object.__setattr__(self, "modulus", m)
        object.__setattr__(self, "value", int(self.value) % m.value)

    def __int__(self):
        return self.value


def as_prime(p) -> int:
    """Accept a Prime or an int and return the certified int value."""
    if isinstance(p, Prime):
        return p.value
    return Prime(int(p)).value


def mod_inverse(a, p=None) -> int:
    """Inverse of ``a`` modulo ``p``; ``a`` may be a Residue (then ``p`` is implied)."""
    if isinstance(a, Residue):
        a, p = a.value, a.modulus.value
    p = int(p)
    a = int(a) % p
    if a == 0 or math.gcd(a, p) != 1:
        raise DegenerateInput(f"{a} is not invertible modulo {p}")
    return pow(a, -1, p)


@lru_cache(maxsize=64)
def _roots(p: int) -> np.ndarray:
    k = np.arange(p, dtype=np.float64)
    table = np.exp(2j * np.pi * k / p)
    table.setflags(write=False)
    return table


def roots_of_unity(p) -> np.ndarray:
    """Read-only table ``t[k] = e(k/p)``, built once per modulus."""
    return _roots(int(p))


def additive_character(x, p) -> complex:
    """e(x/p), looked up in the per-modulus root table."""
    p = int(p)
    return complex(_roots(p)[int(x) % p])


def characters(x, p) -> np.ndarray:
    """Vectorized e(x/p) for an integer array ``x``."""
    p = int(p)
    return _roots(p)[np.mod(np.asarray(x, dtype=np.int64), p)]


def _small_sieve(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if flags[i]:
            flags[i * i :: i] = False
    return np.flatnonzero(flags)


def primes_in(lo: int, hi: int, segment: int = 1 << 20) -> list:
    """All primes in [lo, hi], ascending.

    Uses a segmented sieve when sqrt(hi) is small enough to sieve with, and
    falls back to Miller-Rabin on each candidate for very high, narrow ranges.
    """
    lo, hi = max(int(lo), 2), int(hi)
    if hi < lo:
        return []
    if hi > MAX_MODULUS:
        raise ValueError("upper bound exceeds 2**63")
    root = math.isqrt(hi)
    if root > 10**7:
        return [n for n in range(lo, hi + 1) if is_prime(n)]
    base = _small_sieve(root)
    out = []
    for start in range(lo, hi + 1, segment):
        stop = min(start + segment - 1, hi)
        flags = np.ones(stop - start + 1, dtype=bool)
        for p in base:
            p = int(p)
            if p * p > stop:
                break
            first = max(p * p, (start + p - 1) // p * p)
            flags[first - start :: p] = False
        out.extend(int(v) + start for v in np.flatnonzero(flags))
    return out


@lru_cache(maxsize=256)
def factorint(n: int) -> tuple:
    """Prime factorization as a tuple of (prime, exponent), by trial division."""
    n = int(n)
    if n < 1:
        raise ValueError("factorint needs n >= 1")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def euler_phi(n: int) -> int:
    result = int(n)
    for p, _ in factorint(n):
        result -= result // p
    return result


def num_divisors(n: int) -> int:
    return math.prod(e + 1 for _, e in factorint(n))


def squarefree_divisors(n: int) -> list:
    """Pairs (d, mu(d)) over the squarefree divisors of n."""
    out = [(1, 1)]
    for p, _ in factorint(n):
        out += [(d * p, -m) for d, m in out]
    return sorted(out)


def divisors(n: int) -> list:
    ds = [1]
    for p, e in factorint(n):
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


@lru_cache(maxsize=64)
def primitive_root(p: int) -> int:
    """Smallest positive primitive root modulo the prime p."""
    p = as_prime(p)
    if p == 2:
        return 1
    factors = [q for q, _ in factorint(p - 1)]
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    raise AssertionError("unreachable for prime p")


@lru_cache(maxsize=64)
def discrete_log_table(p: int):
    """(powers, logs): powers[i] = g^i mod p and logs[g^i] = i for i < p-1."""
    g = primitive_root(p)
    powers = np.empty(p - 1, dtype=np.int64)
    v = 1
    for i in range(p - 1):
        powers[i] = v
        v = v * g % p
    logs = np.full(p, -1, dtype=np.int64)
    logs[powers] = np.arange(p - 1)
    powers.setflags(write=False)
    logs.setflags(write=False)
    return powers, logs


def inverse_table(p: int) -> np.ndarray:
    """inv[a] = a^{-1} mod p for a != 0, inv[0] = 0."""
    powers, logs = discrete_log_table(int(p))
    inv = np.zeros(p, dtype=np.int64)
    n = p - 1
    inv[powers] = powers[(-np.arange(n)) % n]
    return inv
