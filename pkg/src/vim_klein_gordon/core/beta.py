"""Beta function at positive integers and the weighted power integral.

    int_0^r (s - r)^m s^n ds = (-1)^m B(m+1, n+1) r^(m+n+1)

Every VIM integration step reduces to this identity.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import NamedTuple

from vim_klein_gordon.core.errors import DomainError


class BetaValue(NamedTuple):
    m: int
    n: int
    value: Fraction


class WeightedIntegral(NamedTuple):
    sign: int
    magnitude: Fraction
    power: int


@lru_cache(maxsize=None)
def beta(m: int, n: int) -> Fraction:
    """B(m, n) = (m-1)! (n-1)! / (m+n-1)! for integers m, n >= 1."""
    if m < 1 or n < 1:
        raise DomainError(f"beta is defined for m, n >= 1, got ({m}, {n})")
    return Fraction(factorial(m - 1) * factorial(n - 1), factorial(m + n - 1))


def beta_value(m: int, n: int) -> BetaValue:
    return BetaValue(m, n, beta(m, n))


def weighted_integral(m: int, n: int) -> WeightedIntegral:
    if m < 0 or n < 0:
        raise DomainError(
            f"weighted integral needs m, n >= 0, got ({m}, {n})"
        )
    return WeightedIntegral(-1 if m % 2 else 1, beta(m + 1, n + 1), m + n + 1)
