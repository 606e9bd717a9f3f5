import math
from fractions import Fraction

import pytest

from vim_klein_gordon.core.airy import airy_coeffs, airy_reference_for
from vim_klein_gordon.core.bounds import (
    BoundParams,
    bound_covers,
    bound_params,
    choose_mu,
    comp1_bound,
    comp1_violations,
    constant_C,
    error_identity_check,
    funny_factorial,
    measure_B,
    measurement_floor,
    ratio_test_check,
    sample_points,
    sup_error,
    theorem1_bound,
)
from vim_klein_gordon.core.engine import FullLambda, PartialSum, run
from vim_klein_gordon.core.errors import (
    DomainError,
    InsufficientOrderError,
    ModeError,
)
from vim_klein_gordon.core.exact import ONE
from vim_klein_gordon.core.multiplier import (
    LambdaTruncation,
    build_alpha_table,
    sup_lambda_estimate,
)

TABLE = build_alpha_table(41)


def test_funny_factorial():
    assert [funny_factorial(k, 3) for k in range(1, 9)] == list(range(1, 9))
    assert funny_factorial(9, 3) == 9 * 8 * 1
    assert funny_factorial(14, 3) == 14 * 13 * 6
    assert funny_factorial(9, 1) == 9 * 8 * 5 * 4 * 1
    with pytest.raises(DomainError):
        funny_factorial(0, 3)


def test_constant_C():
    assert constant_C(TABLE, 3) == 3
    assert constant_C(TABLE, 4) == 7
    assert constant_C(TABLE, 2) == 1


def test_choose_mu():
    assert choose_mu(Fraction(3), 3) == 7


def test_comp1_bound_examples():
    params = BoundParams(N=3, M=0.0, R=1.0, C=Fraction(3), B=Fraction(1), mu=7)
    assert comp1_bound(9, 2, params, exact=True) == Fraction(1, 2)
    assert comp1_bound(17, 3, params, exact=True) == Fraction(9, 1092)
    assert comp1_bound(9, 1, params) == 0.5
    with pytest.raises(DomainError):
        comp1_bound(8, 5, params)
    with pytest.raises(DomainError):
        comp1_bound(9, -1, params)


def test_comp1_bound_does_not_depend_on_the_step():
    params = BoundParams(N=3, M=0.0, R=1.0, C=Fraction(3), B=Fraction(1), mu=7)
    values = [comp1_bound(9, n, params, exact=True) for n in range(4)]
    assert values == [Fraction(1, 2)] * 4


def test_comp1_needs_partial_sum_parameters():
    with pytest.raises(ModeError):
        comp1_bound(20, 5, BoundParams(N=3, M=1.0, R=1.0))


def test_comp1_coverage():
    for N in (3, 4):
        states = run(PartialSum(N), 8, TABLE)
        params = bound_params(states, TABLE, M=1.0, R=1.0)
        assert params.C == constant_C(TABLE, N)
        assert comp1_violations(states, params) == []


def test_measure_B_initial_state():
    states = run(PartialSum(3), 1, TABLE)
    assert measure_B(states[:1], 0) == 1


def test_theorem1_bound():
    assert theorem1_bound(10, 1.05, 1.0, 1.0) == pytest.approx(
        1.05**10 / math.factorial(10)
    )
    assert theorem1_bound(0, 2.0, 1.0, 0.5) == 0.5
    values = [theorem1_bound(n, 3.0, 1.0, 1.0) for n in range(3, 12)]
    assert values == sorted(values, reverse=True)


def test_sample_points():
    points = sample_points(1.0, 4)
    assert len(points) == 9
    assert points[0] == -1.0 and points[-1] == 1.0


def test_sup_error_of_reference_partial_sum_is_zero():
    reference = airy_reference_for(1.0)
    assert sup_error(reference.partial_sum(), reference, 1.0, 50) == 0.0


def test_sup_error_of_initial_guess():
    reference = airy_reference_for(1.0)
    error = sup_error(ONE, reference, 1.0, 100)
    assert 0.5 < error < 0.7


def test_short_reference_is_rejected():
    with pytest.raises(InsufficientOrderError):
        sup_error(ONE, airy_coeffs(5), 1.0, 10)


def test_sup_error_resolves_below_double_precision():
    K, steps, radius = 40, 16, 0.5
    states = run(FullLambda(K), steps, TABLE)
    reference = airy_reference_for(radius)
    errors = [sup_error(s.phi, reference, radius, 100) for s in states]
    M = sup_lambda_estimate(
        LambdaTruncation(K + 1, TABLE), radius, 101, mirrored=True
    )
    for n, error in enumerate(errors):
        assert bound_covers(
            error, theorem1_bound(n, M, radius, errors[0]), 1e-30
        )
    assert errors[-1] < 1e-20
    floor = measurement_floor(1e-30)
    for earlier, later in zip(errors, errors[1:]):
        if earlier > floor:
            assert later < earlier


def test_bound_covers():
    assert bound_covers(1.04, 1.0, 1e-30)
    assert not bound_covers(1.06, 1.0, 1e-30)
    assert bound_covers(5e-30, 1e-40, 1e-30)
    assert not bound_covers(1e-20, 1e-21, 1e-30)


def test_full_lambda_errors_stay_under_theorem1_bound():
    K, steps, radius = 40, 6, 1.0
    states = run(FullLambda(K), steps, TABLE)
    reference = airy_reference_for(radius)
    errors = [sup_error(s.phi, reference, radius, 200) for s in states]
    M = sup_lambda_estimate(
        LambdaTruncation(K + 1, TABLE), radius, 101, mirrored=True
    )
    for n, error in enumerate(errors):
        assert error <= 1.05 * theorem1_bound(n, M, radius, errors[0])
    assert errors[-1] < errors[0]


def test_error_identity():
    K = 30
    states = run(FullLambda(K), 4, TABLE)
    lam = LambdaTruncation(K + 1, TABLE)
    reference = airy_coeffs(K)
    for prev, following in zip(states, states[1:]):
        assert error_identity_check(prev, following, lam, reference, 20)


def test_error_identity_rejects_partial_sums():
    states = run(PartialSum(3), 1, TABLE)
    with pytest.raises(ModeError):
        error_identity_check(
            states[0], states[1], LambdaTruncation(3, TABLE), airy_coeffs(10), 5
        )


def test_error_identity_needs_long_reference():
    states = run(FullLambda(30), 1, TABLE)
    lam = LambdaTruncation(31, TABLE)
    with pytest.raises(DomainError):
        error_identity_check(states[0], states[1], lam, airy_coeffs(20), 10)
    with pytest.raises(DomainError):
        error_identity_check(states[0], states[1], lam, airy_coeffs(30), 31)


def test_bound_params_full_lambda():
    states = run(FullLambda(20), 2, TABLE)
    params = bound_params(states, TABLE, M=2.0, R=1.0)
    assert params.N == 21
    assert params.C is None and params.B is None
    assert params.to_json()["C"] is None


def test_ratio_test():
    result = ratio_test_check(1, 1.0, 20)
    # 8~! / 9~! = 224 / 1440 = 7/45 > 1/9
    assert 8 in result.violations
    assert 2 in result.violations
    assert 1 not in result.violations
    assert not result.literal_bound_holds
    assert result.chain_decreasing
    assert result.ratios[7] == pytest.approx(7 / 45)


def test_ratio_chain_decays_for_every_d():
    for N in (1, 3):
        for D in (1.0, 2.0, 5.0):
            assert ratio_test_check(N, D, 100).chain_decreasing


def test_ratio_test_domain():
    with pytest.raises(DomainError):
        ratio_test_check(3, 0.0, 10)
