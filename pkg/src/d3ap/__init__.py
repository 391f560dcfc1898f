"""Finite-field transforms, summation identities and d_3 progression experiments."""

from .ff_core import Prime, Residue, is_prime, mod_inverse, primes_in
from .trace_fn import (
    KloostermanSpec,
    PeriodicFunction,
    bbessel,
    fourier,
    kloosterman,
    kloosterman_all,
    sheaf_weight_function,
    voronoi,
)
from .windows import ExponentProfile, Region, SmoothWindow, dyadic_window, region_check
from .divisor import DivisorTable, error_term, progression_sum, sieve_dk

__version__ = "0.1.0"

__all__ = [
    "DivisorTable", "ExponentProfile", "KloostermanSpec", "PeriodicFunction", "Prime", "Region",
    "Residue", "SmoothWindow", "bbessel", "dyadic_window", "error_term", "fourier", "is_prime",
    "kloosterman", "kloosterman_all", "mod_inverse", "primes_in", "progression_sum",
    "region_check", "sheaf_weight_function", "sieve_dk", "voronoi",
]
