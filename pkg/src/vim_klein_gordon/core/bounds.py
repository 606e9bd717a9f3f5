"""Convergence bounds and sup-norm error measurement.

Full multiplier: e_{n+1}(r) = int_0^r lambda(r, s) e_n(s) ds, hence
|e_n(r)| <= ||phi_0 - phi||_inf (M r)^n / n!.

Partial sums: |a_m^{n+1}| <= C / ((m-N)(m-N-1)) max_{2<=i<=2N+2} |a^n_{m-i}|
for m > 2N+2, iterated into |a_m^n| <= B C^d / (m-N)~! with
m = (2N+2) d + rho, rho in 1..2N+2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Optional

import mpmath
import numpy as np

from vim_klein_gordon.core.airy import (
    AirySeries,
    tail_ok,
    to_mpf,
    working_digits,
)
from vim_klein_gordon.core.engine import (
    FullLambda,
    IterateState,
    PartialSum,
    integrate_kernel,
)
from vim_klein_gordon.core.errors import (
    DomainError,
    InsufficientOrderError,
    ModeError,
)
from vim_klein_gordon.core.exact import UniPoly, rational_to_str
from vim_klein_gordon.core.multiplier import AlphaTable, LambdaTruncation

RATIO_SLACK = 1e-12
BOUND_SLACK = 0.05
TAIL_ALLOWANCE = 10.0


@dataclass(frozen=True)
class BoundParams:
    N: int
    M: float
    R: float
    C: Optional[Fraction] = None
    B: Optional[Fraction] = None
    mu: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "R": self.R,
            "C": None if self.C is None else rational_to_str(self.C),
            "B": None if self.B is None else rational_to_str(self.B),
            "mu": self.mu,
        }


@dataclass(frozen=True)
class ErrorRecord:
    n: int
    sup_error: float
    theorem1_bound: Optional[float]
    max_coeff: Fraction
    prefix_len: int
    degree: int


@dataclass(frozen=True)
class RatioTestResult:
    N: int
    D: float
    ratios: tuple[float, ...]
    bounds: tuple[float, ...]
    violations: tuple[int, ...]
    chain_decreasing: bool

    @property
    def literal_bound_holds(self) -> bool:
        return not self.violations


def sample_points(radius: float, grid: int) -> np.ndarray:
    if grid < 2:
        raise DomainError(f"grid must be >= 2, got {grid}")
    return np.linspace(-radius, radius, 2 * grid + 1)


def sup_error(
    phi: UniPoly,
    reference: AirySeries,
    radius: float,
    grid: int,
    tail_tol: float = 1e-30,
) -> float:
    """max over 2*grid+1 points of [-R, R] of |phi(r) - phi_ref(r)|.

    The difference against the reference partial sum is formed exactly and
    evaluated at the precision `tail_tol` asks for, so the result is only
    limited by the reference tail, not by double rounding.
    """
    if not tail_ok(reference, radius, tail_tol):
        raise InsufficientOrderError(
            f"order {reference.order} does not meet tail_tol={tail_tol} "
            f"at R={radius}"
        )
    difference = phi - reference.partial_sum()
    points = sample_points(radius, grid)
    with mpmath.workdps(working_digits(tail_tol)):
        coeffs = [to_mpf(c) for c in reversed(difference.coeffs)]
        if not coeffs:
            return 0.0
        worst = max(
            abs(mpmath.polyval(coeffs, mpmath.mpf(float(x)))) for x in points
        )
        return float(worst)


def measurement_floor(tail_tol: float) -> float:
    """Largest error the reference tail alone can put into `sup_error`."""
    return TAIL_ALLOWANCE * tail_tol


def bound_covers(error: float, bound: float, tail_tol: float) -> bool:
    return error <= bound * (1 + BOUND_SLACK) + measurement_floor(tail_tol)


def theorem1_bound(n: int, M: float, R: float, E0: float) -> float:
    """E0 (M R)^n / n!, accumulated factor by factor to stay in range."""
    if min(n, M, R, E0) < 0:
        raise DomainError("theorem1_bound needs nonnegative arguments")
    value = E0
    for i in range(1, n + 1):
        value *= M * R / i
    return value


def error_identity_check(
    prev: IterateState,
    following: IterateState,
    lam: LambdaTruncation,
    reference: AirySeries,
    checked_degree: int,
) -> bool:
    """Coefficients of e_{n+1} against int_0^r lambda e_n, degree by degree."""
    mode = prev.mode
    if not isinstance(mode, FullLambda):
        raise ModeError(
            f"the error identity only holds for the full multiplier, "
            f"not {mode.label}"
        )
    if checked_degree > mode.K:
        raise DomainError(
            f"checked_degree {checked_degree} exceeds working order {mode.K}"
        )
    if reference.order < mode.K:
        raise DomainError(
            f"reference order {reference.order} is below working order {mode.K}"
        )
    exact = reference.partial_sum(mode.K)
    error = prev.phi - exact
    next_error = following.phi - exact
    propagated = integrate_kernel(lam, error, checked_degree)
    return all(
        next_error.coeff(d) == propagated.coeff(d)
        for d in range(checked_degree + 1)
    )


def funny_factorial(k: int, N: int) -> int:
    """k~! = k for k <= 2N+2, else k (k-1) (k-(2N+2))~!."""
    if k < 1:
        raise DomainError(f"funny factorial needs k >= 1, got {k}")
    span = 2 * N + 2
    result = 1
    while k > span:
        result *= k * (k - 1)
        k -= span
    return result * k


def constant_C(table: AlphaTable, N: int) -> Fraction:
    """1 + 2 sum_{k=3}^{N} k! sum_j |alpha_kj|."""
    if N < 2:
        raise DomainError(f"constant_C needs N >= 2, got {N}")
    if table.order < N:
        raise DomainError(f"alpha table order {table.order} is below {N}")
    total = Fraction(0)
    for k in range(3, N + 1):
        total += factorial(k) * sum(abs(c) for c in table[k].coeffs)
    return 1 + 2 * total


def choose_mu(C: Fraction, N: int) -> int:
    """Smallest m with C / ((m-N)(m-N-1)) < 1/2."""
    m = N + 2
    while Fraction(C) / ((m - N) * (m - N - 1)) >= Fraction(1, 2):
        m += 1
    return m


def measure_B(states: list[IterateState], mu: int) -> Fraction:
    if not states:
        raise DomainError("measure_B needs a nonempty run")
    return max(state.phi.max_abs_coeff(upto=mu) for state in states)


def bound_params(
    states: list[IterateState],
    table: AlphaTable,
    M: float,
    R: float,
) -> BoundParams:
    mode = states[0].mode
    if isinstance(mode, PartialSum):
        C = constant_C(table, mode.N)
        mu = choose_mu(C, mode.N)
        return BoundParams(
            N=mode.N, M=M, R=R, C=C, B=measure_B(states, mu), mu=mu
        )
    return BoundParams(N=mode.K + 1, M=M, R=R)


def comp1_bound(
    m: int, n: int, params: BoundParams, *, exact: bool = False
) -> float | Fraction:
    """B C^d / (m-N)~! with m = (2N+2) d + rho, for every step n."""
    N = params.N
    span = 2 * N + 2
    if m <= span:
        raise DomainError(f"comp1 bound needs m > 2N+2 = {span}, got {m}")
    if n < 0:
        raise DomainError(f"comp1 bound needs n >= 0, got {n}")
    if params.B is None or params.C is None:
        raise ModeError("comp1 bound needs partial-sum parameters B and C")
    d = (m - 1) // span
    value = params.B * params.C**d / funny_factorial(m - N, N)
    return value if exact else float(value)


def comp1_violations(
    states: list[IterateState], params: BoundParams
) -> list[tuple[int, int]]:
    """(n, m) pairs where |a_m^n| exceeds the exact comp1 bound."""
    span = 2 * params.N + 2
    found = []
    for state in states:
        for m, value in state.phi.nonzero_terms():
            if m <= span:
                continue
            if abs(value) > comp1_bound(m, state.n, params, exact=True):
                found.append((state.n, m))
    return found


def ratio_test_check(N: int, D: float, terms: int) -> RatioTestResult:
    """Ratios (D^{k+1}/(k+1)~!) / (D^k/k~!) for k = 1..terms.

    Records where the ratio exceeds D/(k+1) and whether the ratio drops
    strictly along every residue class of k mod (2N+2), which is what
    drives the ratios to zero.
    """
    if D <= 0:
        raise DomainError(f"D must be positive, got {D}")
    span = 2 * N + 2
    exact = [
        Fraction(funny_factorial(k, N), funny_factorial(k + 1, N))
        for k in range(1, terms + span + 1)
    ]
    ratios = tuple(D * float(g) for g in exact[:terms])
    bounds = tuple(D / (k + 1) for k in range(1, terms + 1))
    violations = tuple(
        k
        for k, ratio, bound in zip(range(1, terms + 1), ratios, bounds)
        if ratio > bound * (1 + RATIO_SLACK)
    )
    chain_decreasing = all(
        exact[i + span] < exact[i] for i in range(terms)
    )
    return RatioTestResult(N, D, ratios, bounds, violations, chain_decreasing)
