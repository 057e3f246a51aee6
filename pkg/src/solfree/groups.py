"""Carrier-group descriptors.

Finite cyclic groups Z/m are described by their modulus (a positive int);
the circle group is described by the :data:`TORUS` sentinel.
"""

from __future__ import annotations


class _Torus:
    """Singleton marker for the circle group R/Z."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TORUS"


TORUS = _Torus()


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def validate_modulus(m) -> int:
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"modulus must be a positive integer, got {m!r}")
    return m
