"""Invariant suite behind `vim-kg verify` and the `invariant_suite` asset.

Every check records a pass/fail/skip count under its invariant name.
Statements that are reported but not asserted go to `observations`.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any, Callable, Optional

import dagster as dg

from vim_klein_gordon import __version__
from vim_klein_gordon.core.airy import (
    airy_coeffs,
    airy_coeffs_independent,
    airy_reference_for,
    residual_check,
)
from vim_klein_gordon.core.beta import beta, weighted_integral
from vim_klein_gordon.core.bounds import (
    bound_covers,
    bound_params,
    comp1_violations,
    error_identity_check,
    measurement_floor,
    ratio_test_check,
    sup_error,
    theorem1_bound,
)
from vim_klein_gordon.core.engine import (
    FullLambda,
    IterateState,
    PartialSum,
    airy_prefix_length,
    coefficient_recursion_check,
    degree_bound,
    fixed_point_check,
    run,
    step_direct,
    step_scatter,
)
from vim_klein_gordon.core.errors import FormulaInapplicableError
from vim_klein_gordon.core.exact import UniPoly
from vim_klein_gordon.core.multiplier import (
    AlphaTable,
    LambdaTruncation,
    build_alpha_table,
    lambda_ode_residual,
    sup_lambda_estimate,
)

DEFAULT_SEED = 20240601
SUITE_N = (3, 4, 5, 6)
SUITE_STEPS = 10
SUITE_RADII = (0.5, 1.0, 2.0)
SUITE_GRID = 500
TAIL_TOL = 1e-30

ACCURACY_K = 120
ACCURACY_STEPS = 12
ACCURACY_TOL = 1e-6

# first step whose sup error on [-1, 1] is below CONVERGENCE_TOL, per N
CONVERGENCE_FIRST_BELOW = {3: 4, 4: 4, 5: 4}
CONVERGENCE_TOL = 1e-6
CONVERGENCE_STEPS = 20
CONVERGENCE_GRID = 200
CONVERGENCE_TAIL_TOL = 1e-50


@dataclass
class Tally:
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    failures: list[str] = field(default_factory=list)


@dataclass
class VerifySummary:
    seed: int
    tallies: dict[str, Tally]
    observations: dict[str, Any]

    @property
    def ok(self) -> bool:
        return all(tally.failed == 0 for tally in self.tallies.values())

    @property
    def failed(self) -> int:
        return sum(tally.failed for tally in self.tallies.values())

    def render(self) -> str:
        width = max((len(name) for name in self.tallies), default=0)
        lines = [f"seed {self.seed}"]
        for name, tally in self.tallies.items():
            status = "ok" if tally.failed == 0 else "FAIL"
            lines.append(
                f"{name:<{width}}  {status:<4}  passed={tally.passed} "
                f"failed={tally.failed} skipped={tally.skipped}"
            )
            lines += [f"    {failure}" for failure in tally.failures[:5]]
        lines.append("observations:")
        lines += [f"  {key}: {value}" for key, value in self.observations.items()]
        lines.append("PASS" if self.ok else "FAIL")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict[str, Any]:
        return {
            "version": __version__,
            "seed": self.seed,
            "ok": self.ok,
            "tallies": {
                name: {
                    "passed": tally.passed,
                    "failed": tally.failed,
                    "skipped": tally.skipped,
                    "failures": tally.failures,
                }
                for name, tally in self.tallies.items()
            },
            "observations": self.observations,
        }


class InvariantSuite:
    def __init__(self, seed: int = DEFAULT_SEED):
        self.seed = seed
        self.tallies: dict[str, Tally] = defaultdict(Tally)
        self.observations: dict[str, Any] = {}

    def record(self, name: str, ok: bool, detail: str = "") -> bool:
        tally = self.tallies[name]
        if ok:
            tally.passed += 1
        else:
            tally.failed += 1
            tally.failures.append(detail)
        return ok

    def skip(self, name: str) -> None:
        self.tallies[name].skipped += 1

    def observe(self, name: str, value: Any) -> None:
        self.observations[name] = value

    def summary(self) -> VerifySummary:
        return VerifySummary(self.seed, dict(self.tallies), self.observations)


def binomial_integral(m: int, n: int) -> Fraction:
    """Coefficient of r^(m+n+1) in int_0^r (s - r)^m s^n ds by expansion."""
    return sum(
        (
            Fraction(comb(m, i) * (-1) ** (m - i), i + n + 1)
            for i in range(m + 1)
        ),
        Fraction(0),
    )


def alpha_table_independent(order: int) -> list[dict[int, Fraction]]:
    """alpha_kj = -(alpha_{k-3,j} + alpha_{k-2,j-1}) / (k (k-1)) on dicts."""
    table: list[dict[int, Fraction]] = [{}, {0: Fraction(1)}, {}]
    for k in range(3, order + 1):
        entry: dict[int, Fraction] = defaultdict(Fraction)
        for j, value in table[k - 3].items():
            entry[j] += value
        for j, value in table[k - 2].items():
            entry[j + 1] += value
        table.append(
            {j: -v / (k * (k - 1)) for j, v in entry.items() if v != 0}
        )
    return table[: order + 1]


def check_beta(suite: InvariantSuite, limit: int = 30, oracle: int = 10):
    for m in range(1, limit + 1):
        for n in range(1, limit + 1):
            suite.record(
                "beta-symmetry", beta(m, n) == beta(n, m), f"B({m},{n})"
            )
            suite.record(
                "beta-recursion",
                beta(m, n + 1) == beta(n, m) * Fraction(n, m + n),
                f"B({m},{n + 1})",
            )
    for m in range(oracle + 1):
        for n in range(oracle + 1):
            sign, magnitude, power = weighted_integral(m, n)
            suite.record(
                "weighted-integral-oracle",
                power == m + n + 1
                and sign * magnitude == binomial_integral(m, n),
                f"(m={m}, n={n})",
            )


def check_airy(suite: InvariantSuite, order: int = 200):
    series = airy_coeffs(order)
    suite.record(
        "airy-initial-values",
        series.coeffs[:3] == (1, 0, Fraction(-1, 2)),
        str(series.coeffs[:3]),
    )
    for K in range(3, order + 1):
        suite.record(
            "airy-residual", residual_check(airy_coeffs(K)) == 0, f"K={K}"
        )
    independent = airy_coeffs_independent(order)
    for k, (a, b) in enumerate(zip(series.coeffs, independent)):
        suite.record("airy-oracle", a == b, f"a_{k}: {a} != {b}")
    largest = series.max_abs_coeff()
    suite.record("airy-bounded", largest <= 1, f"max |a_k| = {largest}")
    suite.observe(f"max |a_k| for k <= {order}", str(largest))


def check_alpha(
    suite: InvariantSuite,
    table: AlphaTable,
    residual_orders: range = range(2, 41),
    oracle_order: int = 60,
):
    for k in range(table.order + 1):
        suite.record(
            "alpha-degree", table[k].degree <= k, f"deg alpha_{k} > {k}"
        )
    independent = alpha_table_independent(min(oracle_order, table.order))
    for k, entry in enumerate(independent):
        suite.record(
            "alpha-oracle",
            table[k] == UniPoly.from_terms(entry),
            f"alpha_{k}",
        )
    for N in residual_orders:
        if N > table.order:
            suite.skip("lambda-ode-residual")
            continue
        trunc = LambdaTruncation(N, table)
        residual = lambda_ode_residual(trunc)
        vanishing = all(p.is_zero() for p in residual.orders[: N - 1])
        edge = residual.orders[N - 1] == (
            trunc.alpha(N - 1).shift(1) + trunc.alpha(N - 2)
        )
        suite.record("lambda-ode-residual", vanishing and edge, f"N={N}")
        suite.record(
            "lambda-boundary",
            residual.diagonal_value.is_zero() and residual.diagonal_slope == 1,
            f"N={N}",
        )


def random_poly(rng: random.Random, max_degree: int = 20) -> UniPoly:
    degree = rng.randint(0, max_degree)
    return UniPoly(
        Fraction(rng.randint(-50, 50), rng.randint(1, 30))
        if rng.random() < 0.6
        else 0
        for _ in range(degree + 1)
    )


def check_scatter_direct(
    suite: InvariantSuite,
    table: AlphaTable,
    samples: int = 100,
    orders: tuple[int, ...] = SUITE_N,
):
    rng = random.Random(suite.seed)
    for i in range(samples):
        N = rng.choice(orders)
        lam = LambdaTruncation(N, table)
        state = IterateState(0, random_poly(rng), PartialSum(N))
        suite.record(
            "scatter-equals-direct",
            step_scatter(state, lam).phi == step_direct(state, lam).phi,
            f"random polynomial #{i}, N={N}",
        )


def check_partial_run(
    suite: InvariantSuite,
    states: list[IterateState],
    table: AlphaTable,
):
    """Structure checks along one partial-sum run."""
    N = states[0].mode.N
    lam = LambdaTruncation(N, table)
    reference = airy_coeffs(max(3, max(state.degree for state in states)))
    wide_prefix_holds = True
    prefixes = []
    for prev, following in zip(states, states[1:]):
        suite.record(
            "scatter-equals-direct",
            step_direct(prev, lam).phi == following.phi,
            f"N={N} step {prev.n}",
        )
        for m in range(2, following.degree + 1):
            try:
                ok = coefficient_recursion_check(prev, following, lam, m)
            except FormulaInapplicableError:
                suite.skip("gather-recursion")
                continue
            suite.record("gather-recursion", ok, f"N={N} n={following.n} m={m}")
    for state in states:
        bound = degree_bound(state.mode, state.n)
        suite.record(
            "degree-bound",
            state.degree <= bound,
            f"N={N} n={state.n}: {state.degree} > {bound}",
        )
        prefix = airy_prefix_length(state, reference)
        prefixes.append(prefix)
        suite.record(
            "airy-prefix",
            prefix >= 2 * state.n + 1,
            f"N={N} n={state.n}: prefix {prefix}",
        )
        wide_prefix_holds &= prefix >= 2 * state.n + 2
    suite.observe(f"airy prefix lengths N={N}", prefixes)
    suite.observe(f"prefix >= 2n+2 on every step N={N}", wide_prefix_holds)


def check_comp1(
    suite: InvariantSuite, states: list[IterateState], table: AlphaTable
):
    params = bound_params(states, table, M=0.0, R=1.0)
    N = params.N
    violations = comp1_violations(states, params)
    suite.record("comp1-coverage", not violations, f"N={N}: {violations[:5]}")
    suite.observe(
        f"comp1 constants N={N}",
        {"C": str(params.C), "mu": params.mu, "B": str(params.B)},
    )


def check_full_lambda(
    suite: InvariantSuite,
    table: AlphaTable,
    K: int = 60,
    steps: int = 8,
    radii: tuple[float, ...] = (0.5, 1.0),
    identity_steps: int = 5,
    checked_degree: int = 40,
    grid: int = SUITE_GRID,
    lambda_grid: int = 101,
):
    mode = FullLambda(K)
    states = run(mode, steps, table)
    lam = LambdaTruncation(K + 1, table)
    exact = airy_coeffs(K)
    for prev, following in zip(states, states[1 : identity_steps + 2]):
        suite.record(
            "error-identity",
            error_identity_check(prev, following, lam, exact, checked_degree),
            f"K={K} n={prev.n}",
        )
    for radius in radii:
        errors = _theorem1_coverage(
            suite, states, lam, radius, grid, lambda_grid
        )
        suite.observe(f"full-lambda sup errors R={radius}", errors)
    suite.record(
        "fixed-point", fixed_point_check(exact, mode, table), f"K={K}"
    )


def check_full_lambda_accuracy(
    suite: InvariantSuite,
    table: AlphaTable,
    K: int = ACCURACY_K,
    steps: int = ACCURACY_STEPS,
    radius: float = 1.0,
    grid: int = 1000,
    lambda_grid: int = 201,
):
    """Bound coverage at the production working order, plus the absolute
    error reached after `steps` steps."""
    states = run(FullLambda(K), steps, table)
    lam = LambdaTruncation(K + 1, table)
    errors = _theorem1_coverage(suite, states, lam, radius, grid, lambda_grid)
    suite.record(
        "full-lambda-accuracy",
        errors[-1] < ACCURACY_TOL,
        f"K={K} R={radius} n={steps}: {errors[-1]:.3e} >= {ACCURACY_TOL}",
    )
    suite.observe(f"full-lambda K={K} sup errors R={radius}", errors)


def _theorem1_coverage(
    suite: InvariantSuite,
    states: list[IterateState],
    lam: LambdaTruncation,
    radius: float,
    grid: int,
    lambda_grid: int,
) -> list[float]:
    reference = airy_reference_for(radius, TAIL_TOL)
    errors = [
        sup_error(state.phi, reference, radius, grid, TAIL_TOL)
        for state in states
    ]
    M = sup_lambda_estimate(lam, radius, lambda_grid, mirrored=True)
    for state, error in zip(states, errors):
        bound = theorem1_bound(state.n, M, radius, errors[0])
        suite.record(
            "theorem1-coverage",
            bound_covers(error, bound, TAIL_TOL),
            f"R={radius} n={state.n}: {error:.3e} > {bound:.3e}",
        )
    return errors


def check_ratio_test(
    suite: InvariantSuite,
    D_values: tuple[float, ...] = (1.0, 2.0, 5.0),
    N_values: tuple[int, ...] = (1, 3),
    terms: int = 100,
):
    for N in N_values:
        for D in D_values:
            result = ratio_test_check(N, D, terms)
            suite.record(
                "ratio-chain-decay",
                result.chain_decreasing,
                f"N={N} D={D}",
            )
            suite.observe(
                f"ratio <= D/(k+1) violated at N={N} D={D}",
                list(result.violations),
            )


def first_below(errors: list[float], tol: float) -> Optional[int]:
    return next((n for n, error in enumerate(errors) if error < tol), None)


def eventually_decreasing(
    errors: list[float], start: int, tail_tol: float
) -> bool:
    """Strict decrease from `start` on, until the reference tail is reached."""
    floor = measurement_floor(tail_tol)
    return all(
        later < earlier
        for earlier, later in zip(errors[start:], errors[start + 1 :])
        if earlier > floor
    )


def check_convergence(
    suite: InvariantSuite,
    table: AlphaTable,
    expected: dict[int, int] = CONVERGENCE_FIRST_BELOW,
    steps: int = CONVERGENCE_STEPS,
    radius: float = 1.0,
    grid: int = CONVERGENCE_GRID,
    tail_tol: float = CONVERGENCE_TAIL_TOL,
):
    """Partial-sum runs drop below CONVERGENCE_TOL at the pinned step and
    keep decreasing afterwards."""
    reference = airy_reference_for(radius, tail_tol)
    for N, pinned in expected.items():
        states = run(PartialSum(N), steps, table)
        errors = [
            sup_error(state.phi, reference, radius, grid, tail_tol)
            for state in states
        ]
        reached = first_below(errors, CONVERGENCE_TOL)
        suite.record(
            "partial-sum-convergence",
            reached == pinned,
            f"N={N}: first n below {CONVERGENCE_TOL} is {reached}, "
            f"expected {pinned}",
        )
        suite.record(
            "partial-sum-decrease",
            reached is not None
            and eventually_decreasing(errors, reached, tail_tol),
            f"N={N}: {[f'{e:.2e}' for e in errors]}",
        )
        suite.observe(f"partial-sum N={N} R={radius} sup errors", errors)


def observe_sup_errors(
    suite: InvariantSuite,
    runs: dict[int, list[IterateState]],
    radii: tuple[float, ...] = SUITE_RADII,
    grid: int = SUITE_GRID,
):
    """Final sup errors of the partial-sum runs, reported without assertion."""
    for radius in radii:
        reference = airy_reference_for(radius, TAIL_TOL)
        for N, states in runs.items():
            error = sup_error(states[-1].phi, reference, radius, grid, TAIL_TOL)
            suite.observe(
                f"partial-sum N={N} R={radius} sup error at n={states[-1].n}",
                f"{error:.6e}",
            )


def run_suite(
    seed: int = DEFAULT_SEED,
    progress: Optional[Callable[[str], None]] = None,
) -> VerifySummary:
    logger = dg.get_dagster_logger()
    say = progress or logger.info
    suite = InvariantSuite(seed)
    table = build_alpha_table(ACCURACY_K + 1)

    say("Checking Beta identities")
    check_beta(suite)
    say("Checking Airy coefficients")
    check_airy(suite)
    say("Checking the multiplier table")
    check_alpha(suite, table)

    say("Checking partial-sum runs")
    runs = {N: run(PartialSum(N), SUITE_STEPS, table) for N in SUITE_N}
    for states in runs.values():
        check_partial_run(suite, states, table)
    check_scatter_direct(suite, table)
    for N in (3, 4):
        check_comp1(suite, runs[N][:9], table)

    say("Checking the full multiplier")
    check_full_lambda(suite, table)
    check_full_lambda_accuracy(suite, table)
    check_ratio_test(suite)

    say("Checking convergence of the partial-sum scheme")
    check_convergence(suite, table)
    observe_sup_errors(suite, runs)

    summary = suite.summary()
    if summary.ok:
        logger.info("Invariant suite passed")
    else:
        logger.error(f"Invariant suite failed {summary.failed} checks")
    return summary
