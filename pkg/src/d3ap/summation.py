"""Compensated (Neumaier) accumulation with a fixed, ascending term order.

Everything here reduces in the order the terms are given, so results do not
depend on how work was split across threads.
"""

import math

import numpy as np


class Accumulator:
    """Running Neumaier sum over float or complex arrays of a fixed shape.

    Real and imaginary parts are compensated separately.
    """

    def __init__(self, shape=(), dtype=complex):
        self._complex = np.issubdtype(np.dtype(dtype), np.complexfloating)
        n = 2 if self._complex else 1
        self._sum = np.zeros((n,) + tuple(shape))
        self._comp = np.zeros((n,) + tuple(shape))

    def add(self, term):
        term = np.asarray(term)
        if self._complex:
            parts = np.stack(np.broadcast_arrays(term.real, term.imag))
        else:
            parts = np.asarray(term, dtype=float)[None, ...]
        s = self._sum
        t = s + parts
        big = np.abs(s) >= np.abs(parts)
        self._comp += np.where(big, (s - t) + parts, (parts - t) + s)
        self._sum = t

    @property
    def value(self):
        total = self._sum + self._comp
        if self._complex:
            out = total[0] + 1j * total[1]
        else:
            out = total[0]
        return out[()] if out.ndim == 0 else out


def csum(values):
    """Correctly rounded sum of a 1-d real or complex sequence."""
    values = np.asarray(values).ravel()
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))
    return math.fsum(values.tolist())
