"""Airy coefficients of the exact solution and a controlled evaluator.

After substituting u = e^{it} phi(r) the problem becomes
phi'' + r phi + phi = 0, phi(0) = 1, phi'(0) = 0, whose power series
coefficients satisfy a_k = -(a_{k-3} + a_{k-2}) / (k (k-1)) with
a_{-1} = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from dagster import get_dagster_logger

from vim_klein_gordon.core.errors import DomainError, InsufficientOrderError
from vim_klein_gordon.core.exact import UniPoly, rational_to_str


@dataclass(frozen=True)
class AirySeries:
    coeffs: tuple[Fraction, ...]

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> Fraction:
        if k < 0:
            return Fraction(0)
        return self.coeffs[k]

    def partial_sum(self, order: int | None = None) -> UniPoly:
        stop = self.order if order is None else order
        return UniPoly(self.coeffs[: stop + 1])

    def max_abs_coeff(self) -> Fraction:
        return max(abs(a) for a in self.coeffs)

    def to_json(self) -> list[str]:
        return [rational_to_str(a) for a in self.coeffs]


def airy_coeffs(order: int) -> AirySeries:
    if order < 0:
        raise DomainError(f"order must be >= 0, got {order}")
    coeffs = [Fraction(1), Fraction(0), Fraction(-1, 2)][: order + 1]
    for k in range(3, order + 1):
        lag3 = coeffs[k - 3]
        lag2 = coeffs[k - 2]
        coeffs.append(-(lag3 + lag2) / (k * (k - 1)))
    return AirySeries(tuple(coeffs))


def airy_coeffs_independent(order: int) -> list[Fraction]:
    """Second loop over the same recursion, kept apart as an oracle.

    Works on integer numerators over k! so no Fraction arithmetic is
    shared with `airy_coeffs`.
    """
    # b_k = a_k * k!  =>  b_k = -(b_{k-3} (k-2) + b_{k-2})
    scaled = []
    for k in range(order + 1):
        if k == 0:
            scaled.append(1)
        elif k == 1:
            scaled.append(0)
        else:
            prev3 = scaled[k - 3] * (k - 2) if k >= 3 else 0
            scaled.append(-(prev3 + scaled[k - 2]))
    return [Fraction(b, math.factorial(k)) for k, b in enumerate(scaled)]


def residual_coeffs(series: AirySeries) -> list[Fraction]:
    """Coefficients 0..K-2 of phi'' + r phi + phi for the truncated series."""
    if series.order < 3:
        raise DomainError(f"residual needs order >= 3, got {series.order}")
    a = series
    return [
        (i + 2) * (i + 1) * a[i + 2] + a[i - 1] + a[i]
        for i in range(series.order - 1)
    ]


def residual_check(series: AirySeries) -> Fraction:
    return max(abs(c) for c in residual_coeffs(series))


def to_mpf(value: Fraction) -> mpmath.mpf:
    return mpmath.mpf(value.numerator) / value.denominator


def working_digits(tail_tol: float) -> int:
    return max(20, int(-math.log10(tail_tol)) + 10) if tail_tol > 0 else 20


def tail_ok(series: AirySeries, r: float, tail_tol: float) -> bool:
    """|a_K r^K| < tail_tol and |a_K r^K| < |a_{K-3} r^{K-3}|."""
    k = series.order
    if r == 0:
        return True
    if k < 3:
        return False
    with mpmath.workdps(working_digits(tail_tol)):
        x = abs(mpmath.mpf(r))
        last = abs(to_mpf(series[k])) * x**k
        lagged = abs(to_mpf(series[k - 3])) * x ** (k - 3)
        return bool(last < tail_tol and last < lagged)


def airy_eval(
    series: AirySeries,
    r: float | Fraction,
    tail_tol: float = 1e-30,
    *,
    exact: bool = False,
) -> float | Fraction:
    """Reference value phi(r) summed in order k = 0..K.

    With `exact=True` the exact rational partial sum is returned and no
    tail test is made.
    """
    if exact:
        return series.partial_sum()(Fraction(r))
    if r == 0:
        return float(series[0])
    if not tail_ok(series, float(r), tail_tol):
        raise InsufficientOrderError(
            f"order {series.order} does not meet tail_tol={tail_tol} at r={r}"
        )
    with mpmath.workdps(working_digits(tail_tol)):
        x = mpmath.mpf(float(r))
        total = mpmath.fsum(
            to_mpf(a) * x**k for k, a in enumerate(series.coeffs) if a
        )
        return float(total)


def airy_reference_for(
    radius: float, tail_tol: float = 1e-30, start: int = 16
) -> AirySeries:
    """Grow the order until the tail test holds at |r| = radius."""
    order = max(start, 3)
    series = airy_coeffs(order)
    while not tail_ok(series, radius, tail_tol):
        order += 8
        series = airy_coeffs(order)
    get_dagster_logger().info(
        f"Airy reference for R={radius}, tail_tol={tail_tol}: order {order}"
    )
    return series


def solution_value(
    series: AirySeries, r: float, t: float, tail_tol: float = 1e-30
) -> tuple[float, float]:
    """Real and imaginary parts of u(r, t) = e^{it} phi(r)."""
    phi = float(airy_eval(series, r, tail_tol))
    return math.cos(t) * phi, math.sin(t) * phi
