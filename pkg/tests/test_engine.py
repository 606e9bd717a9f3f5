import random
from fractions import Fraction

import pytest

from vim_klein_gordon.core import engine
from vim_klein_gordon.core.airy import airy_coeffs
from vim_klein_gordon.core.beta import beta
from vim_klein_gordon.core.engine import (
    FullLambda,
    IterateState,
    PartialSum,
    StepTrace,
    airy_prefix_length,
    coefficient_recursion_check,
    degree_bound,
    fixed_point_check,
    gather_coefficient,
    initial_state,
    residual_poly,
    run,
    step_direct,
    step_scatter,
)
from vim_klein_gordon.core.errors import (
    DomainError,
    FormulaInapplicableError,
    InvariantViolation,
    ModeError,
)
from vim_klein_gordon.core.exact import ONE, UniPoly
from vim_klein_gordon.core.multiplier import LambdaTruncation, build_alpha_table

TABLE = build_alpha_table(40)


def lam(N):
    return LambdaTruncation(N, TABLE)


def first_step(N):
    return step_scatter(initial_state(PartialSum(N)), lam(N))


def test_initial_state_is_one():
    state = initial_state(PartialSum(3))
    assert state.n == 0
    assert state.phi == ONE


def test_first_step_n3():
    expected = UniPoly(
        (
            1,
            0,
            Fraction(-1, 2),
            Fraction(-1, 6),
            0,
            Fraction(1, 24),
            Fraction(1, 120),
        )
    )
    assert first_step(3).phi == expected


def test_first_step_n4():
    expected = UniPoly(
        (
            1,
            0,
            Fraction(-1, 2),
            Fraction(-1, 6),
            0,
            Fraction(1, 40),
            Fraction(1, 180),
        )
    )
    assert first_step(4).phi == expected


def test_residual_poly():
    assert residual_poly(ONE) == UniPoly((1, 1))


def test_scatter_matches_direct_on_runs():
    for N in (3, 4, 5, 6):
        states = run(PartialSum(N), 6, TABLE)
        for prev, following in zip(states, states[1:]):
            assert step_direct(prev, lam(N)).phi == following.phi


def test_scatter_matches_direct_on_random_polynomials():
    rng = random.Random(20240601)
    for _ in range(30):
        N = rng.choice((3, 4, 5, 6))
        phi = UniPoly(
            Fraction(rng.randint(-20, 20), rng.randint(1, 9))
            for _ in range(rng.randint(0, 20) + 1)
        )
        state = IterateState(0, phi, PartialSum(N))
        assert step_scatter(state, lam(N)).phi == step_direct(state, lam(N)).phi


def test_trace_replays_the_step():
    state = run(PartialSum(3), 2, TABLE)[-1]
    trace = StepTrace()
    following = step_scatter(state, lam(3), trace)
    assert trace.contributions
    assert trace.replay(state.phi) == following.phi


def test_degree_bound():
    for N in (3, 4):
        for state in run(PartialSum(N), 5, TABLE):
            assert state.degree <= degree_bound(state.mode, state.n)
    assert degree_bound(FullLambda(20), 3) is None


def test_prefix_lengths():
    reference = airy_coeffs(10)
    assert airy_prefix_length(initial_state(PartialSum(3)), reference) == 1
    assert airy_prefix_length(first_step(3), reference) == 3
    wrong = IterateState(0, UniPoly((2,)), PartialSum(3))
    assert airy_prefix_length(wrong, reference) == -1


def test_prefix_grows_with_iteration():
    states = run(PartialSum(3), 6, TABLE)
    reference = airy_coeffs(states[-1].degree)
    for state in states:
        assert airy_prefix_length(state, reference) >= 2 * state.n + 1


def test_prefix_needs_long_reference():
    with pytest.raises(DomainError):
        airy_prefix_length(first_step(3), airy_coeffs(4))


def test_gather_examples():
    start = initial_state(PartialSum(3))
    assert gather_coefficient(start, lam(3), 2) == Fraction(-1, 2)
    assert gather_coefficient(start, lam(3), 4) == 0
    assert gather_coefficient(start, lam(3), 5) == Fraction(1, 24)
    with pytest.raises(FormulaInapplicableError):
        gather_coefficient(start, lam(3), 3)
    with pytest.raises(DomainError):
        gather_coefficient(start, lam(3), 1)


def test_gather_agrees_with_scatter_where_applicable():
    states = run(PartialSum(4), 4, TABLE)
    checked = 0
    for prev, following in zip(states, states[1:]):
        for m in range(2, following.degree + 1):
            try:
                assert coefficient_recursion_check(prev, following, lam(4), m)
            except FormulaInapplicableError:
                continue
            checked += 1
    assert checked > 0


def test_mode_mismatch():
    state = initial_state(PartialSum(3))
    with pytest.raises(ModeError):
        step_scatter(state, lam(4))
    with pytest.raises(ModeError):
        step_direct(initial_state(FullLambda(20)), lam(20))


def test_full_lambda_is_truncated_at_working_order():
    states = run(FullLambda(20), 4, TABLE)
    assert all(state.degree <= 20 for state in states)
    assert states[-1].degree > 6


def test_fixed_point():
    series = airy_coeffs(30)
    assert fixed_point_check(series, PartialSum(3), TABLE)
    assert fixed_point_check(series, FullLambda(30), TABLE)


def test_run_needs_a_step():
    with pytest.raises(DomainError):
        run(PartialSum(3), 0)


def test_cross_check_passes():
    states = run(PartialSum(3), 3, TABLE, cross_check=True)
    assert len(states) == 4


def test_broken_beta_is_caught_by_cross_check(monkeypatch):
    monkeypatch.setattr(engine, "beta", lambda m, n: 2 * beta(m, n))
    with pytest.raises(InvariantViolation) as info:
        run(PartialSum(3), 2, TABLE, cross_check=True)
    assert info.value.invariant == "scatter-equals-direct"
