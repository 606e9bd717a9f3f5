"""VIM iteration for phi'' + r phi + phi = 0, phi(0) = 1, phi'(0) = 0.

    phi_{n+1}(r) = phi_n(r)
        + int_0^r lambda(r, s) (phi_n''(s) + s phi_n(s) + phi_n(s)) ds

`PartialSum(N)` uses lambda_N. `FullLambda(K)` uses lambda_{K+1} and keeps
coefficients of degree <= K, which are then exact for the full multiplier:
an order-k term of lambda only reaches degrees >= k+1, and an output
degree d only reads input degrees <= d.

`step_scatter` is the production step; `step_direct` integrates the
residual term by term and serves as its oracle.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, prod
from typing import Optional, Union

from dagster import get_dagster_logger

from vim_klein_gordon.core.airy import AirySeries
from vim_klein_gordon.core.beta import beta, weighted_integral
from vim_klein_gordon.core.errors import (
    DomainError,
    FormulaInapplicableError,
    InvariantViolation,
    ModeError,
)
from vim_klein_gordon.core.exact import ONE, UniPoly
from vim_klein_gordon.core.multiplier import (
    AlphaTable,
    LambdaTruncation,
    build_alpha_table,
)

DEFAULT_WORKING_ORDER = 120


@dataclass(frozen=True)
class PartialSum:
    N: int

    @property
    def label(self) -> str:
        return f"partial-sum(N={self.N})"


@dataclass(frozen=True)
class FullLambda:
    K: int = DEFAULT_WORKING_ORDER

    @property
    def label(self) -> str:
        return f"full-lambda(K={self.K})"


Mode = Union[PartialSum, FullLambda]


def multiplier_order(mode: Mode) -> int:
    if isinstance(mode, PartialSum):
        return mode.N
    return mode.K + 1


def output_limit(mode: Mode) -> Optional[int]:
    return mode.K if isinstance(mode, FullLambda) else None


def degree_bound(mode: Mode, n: int) -> Optional[int]:
    """(2N+2) n for partial sums; no growth bound in full-lambda mode."""
    if isinstance(mode, PartialSum):
        return (2 * mode.N + 2) * n
    return None


@dataclass(frozen=True)
class IterateState:
    n: int
    phi: UniPoly
    mode: Mode

    @property
    def degree(self) -> int:
        return self.phi.degree


@dataclass(frozen=True)
class TraceRecord:
    source: int
    target: int
    weight: Fraction


@dataclass
class StepTrace:
    contributions: list[TraceRecord] = field(default_factory=list)

    def replay(self, phi: UniPoly) -> UniPoly:
        """Sum weight * a_source per target."""
        acc: dict[int, Fraction] = defaultdict(Fraction)
        for record in self.contributions:
            acc[record.target] += record.weight * phi.coeff(record.source)
        return UniPoly.from_terms(acc)


def initial_state(mode: Mode) -> IterateState:
    return IterateState(0, ONE, mode)


def residual_poly(phi: UniPoly) -> UniPoly:
    """phi'' + r phi + phi."""
    return phi.derivative().derivative() + phi.shift(1) + phi


def _check_truncation(state: IterateState, lam: LambdaTruncation) -> None:
    mode = state.mode
    if isinstance(mode, PartialSum) and lam.N != mode.N:
        raise ModeError(
            f"{mode.label} iterate stepped with lambda_{lam.N}"
        )
    if isinstance(mode, FullLambda) and lam.N < mode.K + 1:
        raise ModeError(
            f"{mode.label} needs lambda of order >= {mode.K + 1}, "
            f"got {lam.N}"
        )


def integrate_kernel(
    lam: LambdaTruncation, f: UniPoly, limit: Optional[int] = None
) -> UniPoly:
    """int_0^r lambda_N(r, s) f(s) ds, expanded term by term.

    Each alpha_kj r^j (s - r)^k s^p term integrates to
    alpha_kj (-1)^k B(k+1, p+1) r^{k+p+j+1}. Degrees above `limit` are
    dropped.
    """
    integrand = list(f.nonzero_terms())
    acc: dict[int, Fraction] = defaultdict(Fraction)
    for k, j, alpha in lam.terms(start=1):
        for p, c in integrand:
            sign, magnitude, power = weighted_integral(k, p)
            degree = power + j
            if limit is not None and degree > limit:
                break
            acc[degree] += sign * magnitude * alpha * c
    return UniPoly.from_terms(acc)


def step_direct(state: IterateState, lam: LambdaTruncation) -> IterateState:
    _check_truncation(state, lam)
    limit = output_limit(state.mode)
    correction = integrate_kernel(lam, residual_poly(state.phi), limit)
    phi = state.phi + correction
    if limit is not None:
        phi = phi.truncate(limit)
    return IterateState(state.n + 1, phi, state.mode)


def step_scatter(
    state: IterateState,
    lam: LambdaTruncation,
    trace: Optional[StepTrace] = None,
) -> IterateState:
    """Scatter every monomial a_m r^m through the closed-form image

        -(B(2,m+1) r^{m+2} + B(2,m+2) r^{m+3})
        + sum_{k>=3} (-1)^k sum_j alpha_kj (m(m-1) B(k+1,m-1) r^{k+m+j-1}
            + B(k+1,m+1) r^{k+m+j+1} + B(k+1,m+2) r^{k+m+j+2}).

    For m < 2 the identity term r^m survives since m(m-1) = 0 kills the
    second derivative that cancels it for m >= 2.
    """
    _check_truncation(state, lam)
    limit = output_limit(state.mode)
    acc: dict[int, Fraction] = defaultdict(Fraction)
    high = [
        (k, j, alpha if k % 2 == 0 else -alpha)
        for k, j, alpha in lam.terms(start=3)
    ]

    def emit(source: int, target: int, weight: Fraction, a: Fraction):
        if limit is not None and target > limit:
            return
        acc[target] += weight * a
        if trace is not None:
            trace.contributions.append(TraceRecord(source, target, weight))

    for m, a in state.phi.nonzero_terms():
        if m < 2:
            emit(m, m, Fraction(1), a)
        emit(m, m + 2, -beta(2, m + 1), a)
        emit(m, m + 3, -beta(2, m + 2), a)
        for k, j, weight in high:
            if limit is not None and k + m + j - 1 > limit:
                continue
            if m >= 2:
                emit(
                    m,
                    k + m + j - 1,
                    weight * (m * (m - 1)) * beta(k + 1, m - 1),
                    a,
                )
            emit(m, k + m + j + 1, weight * beta(k + 1, m + 1), a)
            emit(m, k + m + j + 2, weight * beta(k + 1, m + 2), a)

    return IterateState(state.n + 1, UniPoly.from_terms(acc), state.mode)


def gather_coefficient(
    prev: IterateState, lam: LambdaTruncation, m: int
) -> Fraction:
    """a_m^{n+1} from the per-target form of the recursion.

    With q = m - j - k a term reads
        alpha_kj (a_{q+1} + (a_{q-1} + a_{q-2}) / ((q+1) q))
            * k! / ((m-j) ... (q+2)).
    Where (q+1) q = 0 the form has divided out a vanishing factor in front
    of a_{q+1}; a nonzero a_{q+1} there makes it inapplicable.
    """
    if m < 2:
        raise DomainError(f"gather formula needs m >= 2, got {m}")
    a = prev.phi.coeff
    value = -(a(m - 2) + a(m - 3)) / (m * (m - 1))
    for k, j, alpha in lam.terms(start=3):
        q = m - j - k
        tail = a(q - 1) + a(q - 2)
        denominator = (q + 1) * q
        if denominator == 0:
            if a(q + 1) != 0 or tail != 0:
                raise FormulaInapplicableError(
                    f"m={m}, k={k}, j={j}: (m-j-k+1)(m-j-k) = 0 "
                    f"with a_{q + 1} = {a(q + 1)}"
                )
            continue
        bracket = a(q + 1) + tail / denominator
        if bracket == 0:
            continue
        falling = prod(range(q + 2, m - j + 1))
        sign = -1 if k % 2 else 1
        value += sign * alpha * bracket * Fraction(factorial(k), falling)
    return value


def coefficient_recursion_check(
    prev: IterateState,
    following: IterateState,
    lam: LambdaTruncation,
    m: int,
) -> bool:
    return gather_coefficient(prev, lam, m) == following.phi.coeff(m)


def run(
    mode: Mode,
    steps: int,
    table: Optional[AlphaTable] = None,
    *,
    cross_check: bool = False,
) -> list[IterateState]:
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    logger = get_dagster_logger()
    order = multiplier_order(mode)
    if table is None:
        table = build_alpha_table(max(order, 2))
    lam = LambdaTruncation(order, table)

    state = initial_state(mode)
    states = [state]
    for _ in range(steps):
        following = step_scatter(state, lam)
        if cross_check:
            direct = step_direct(state, lam)
            if direct.phi != following.phi:
                raise InvariantViolation(
                    "scatter-equals-direct",
                    f"{mode.label} step {state.n} -> {following.n}",
                )
        logger.info(
            f"{mode.label}: phi_{following.n} has degree {following.degree}"
        )
        states.append(following)
        state = following
    return states


def airy_prefix_length(state: IterateState, reference: AirySeries) -> int:
    """Largest L with a_m^n equal to the Airy a_m for every m <= L.

    Returns -1 when a_0 already differs.
    """
    if reference.order < state.phi.degree:
        raise DomainError(
            f"reference order {reference.order} is below the iterate "
            f"degree {state.phi.degree}"
        )
    for m in range(reference.order + 1):
        if state.phi.coeff(m) != reference[m]:
            return m - 1
    return reference.order


def fixed_point_check(
    series: AirySeries, mode: Mode, table: Optional[AlphaTable] = None
) -> bool:
    """One step from the Airy partial sum of order K leaves degrees <= K."""
    order = multiplier_order(mode)
    table = table or build_alpha_table(max(order, 2))
    state = IterateState(0, series.partial_sum(), mode)
    following = step_scatter(state, LambdaTruncation(order, table))
    return all(
        following.phi.coeff(m) == series[m] for m in range(series.order + 1)
    )
