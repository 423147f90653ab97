"""Deterministic enumerations of naturals pairs, rationals, and rational intervals.

Everything here is a fixed total function of the index, so certificates
built on top of these enumerations are reproducible across runs.
"""

from __future__ import annotations

import threading
from math import gcd, isqrt
from typing import Optional, Tuple

from .reals import rat


def pair(a: int, b: int) -> int:
    """Cantor pairing (a, b) -> n."""
    s = a + b
    return s * (s + 1) // 2 + b


def unpair(n: int) -> Tuple[int, int]:
    """Inverse of :func:`pair`."""
    # triangular root of n
    s = (isqrt(8 * n + 1) - 1) // 2
    b = n - s * (s + 1) // 2
    return s - b, b


def nat_to_int(n: int) -> int:
    """Zigzag 0, -1, 1, -2, 2, ... enumerating all integers."""
    if n % 2 == 0:
        return n // 2
    return -((n + 1) // 2)


def rat_candidate(n: int):
    """Decode index n into a rational, or None when the code is non-canonical.

    n unpairs into (numerator code, denominator - 1); only codes with
    gcd(|num|, den) = 1 are accepted, so every rational has exactly one code.
    """
    zn, d = unpair(n)
    num = nat_to_int(zn)
    den = d + 1
    if gcd(abs(num), den) != 1:
        return None
    return rat(num, den)


class _FilteredEnum:
    """Memoized scan over candidate codes keeping the valid ones in order."""

    def __init__(self, candidate):
        self._candidate = candidate
        self._values = []
        self._next_code = 0
        self._lock = threading.Lock()

    def at(self, i: int):
        with self._lock:
            while len(self._values) <= i:
                v = self._candidate(self._next_code)
                self._next_code += 1
                if v is not None:
                    self._values.append(v)
            return self._values[i]


_rationals = _FilteredEnum(rat_candidate)


def rational_at(i: int):
    """i-th rational in the fixed canonical enumeration."""
    return _rationals.at(i)


def _interval_candidate(n: int) -> Optional[Tuple["object", "object"]]:
    n1, n2 = unpair(n)
    a = rat_candidate(n1)
    b = rat_candidate(n2)
    if a is None or b is None or not a < b:
        return None
    return (a, b)


_intervals = _FilteredEnum(_interval_candidate)


def rational_interval_at(i: int) -> Tuple["object", "object"]:
    """i-th rational open interval (a, b), a < b, in the fixed enumeration."""
    return _intervals.at(i)
