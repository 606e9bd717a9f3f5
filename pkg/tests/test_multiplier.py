from fractions import Fraction

import pytest

from vim_klein_gordon.core.errors import DomainError
from vim_klein_gordon.core.exact import ONE, ZERO, UniPoly
from vim_klein_gordon.core.multiplier import (
    AlphaTable,
    LambdaTruncation,
    alpha_kj,
    build_alpha_table,
    lambda_ode_residual,
    lambda_values,
    sup_lambda_estimate,
)


def test_table_reproduces_classic_series():
    table = build_alpha_table(5)
    assert table[0] == ZERO
    assert table[1] == ONE
    assert table[2] == ZERO
    assert table[3] == UniPoly((0, Fraction(-1, 6)))
    assert table[4] == UniPoly((Fraction(-1, 12),))
    assert table[5] == UniPoly((0, 0, Fraction(1, 120)))


def test_alpha_kj():
    table = build_alpha_table(5)
    assert alpha_kj(table, 3, 1) == Fraction(-1, 6)
    assert alpha_kj(table, 3, 0) == 0
    assert alpha_kj(table, 5, 2) == Fraction(1, 120)
    with pytest.raises(DomainError):
        alpha_kj(table, 6, 0)


def test_degree_bound():
    table = build_alpha_table(60)
    assert all(table[k].degree <= k for k in range(61))


def test_table_needs_order_two():
    with pytest.raises(DomainError):
        build_alpha_table(1)


def test_truncation_cannot_exceed_table():
    with pytest.raises(DomainError):
        LambdaTruncation(6, build_alpha_table(5))


def test_residual_for_n3():
    residual = lambda_ode_residual(LambdaTruncation(3, build_alpha_table(5)))
    assert residual.orders[0] == ZERO
    assert residual.orders[1] == ZERO
    assert residual.orders[2] == 1
    assert residual.diagonal_value == ZERO
    assert residual.diagonal_slope == ONE


def test_residual_vanishes_below_truncation():
    table = build_alpha_table(40)
    for N in range(2, 41):
        trunc = LambdaTruncation(N, table)
        orders = lambda_ode_residual(trunc).orders
        assert all(p.is_zero() for p in orders[: N - 1]), N
        assert orders[N - 1] == trunc.alpha(N - 1).shift(1) + trunc.alpha(N - 2)


def test_flipped_alpha_breaks_residual():
    alphas = list(build_alpha_table(6).alphas)
    alphas[4] = -alphas[4]
    trunc = LambdaTruncation(6, AlphaTable(tuple(alphas)))
    assert not lambda_ode_residual(trunc).orders[2].is_zero()


def test_lambda_values_for_n1():
    trunc = LambdaTruncation(1, build_alpha_table(2))
    assert list(lambda_values(trunc, 1.0, [0.0, 0.5, 1.0])) == [-1.0, -0.5, 0.0]


def test_sup_estimate_n1():
    trunc = LambdaTruncation(1, build_alpha_table(2))
    assert sup_lambda_estimate(trunc, 1.0, 11) == pytest.approx(1.05)


def test_sup_estimate_zero_radius():
    trunc = LambdaTruncation(5, build_alpha_table(5))
    assert sup_lambda_estimate(trunc, 0.0, 5) == 0.0


def test_sup_estimate_is_stable_under_refinement():
    trunc = LambdaTruncation(40, build_alpha_table(40))
    coarse = sup_lambda_estimate(trunc, 1.0, 201)
    fine = sup_lambda_estimate(trunc, 1.0, 401)
    assert fine == pytest.approx(coarse, rel=0.01)


def test_mirrored_lattice_covers_more():
    trunc = LambdaTruncation(10, build_alpha_table(10))
    plain = sup_lambda_estimate(trunc, 1.0, 51)
    assert sup_lambda_estimate(trunc, 1.0, 51, mirrored=True) >= plain


def test_sup_estimate_domain():
    trunc = LambdaTruncation(3, build_alpha_table(3))
    with pytest.raises(DomainError):
        sup_lambda_estimate(trunc, -1.0, 10)
    with pytest.raises(DomainError):
        sup_lambda_estimate(trunc, 1.0, 1)


def test_table_json():
    table = build_alpha_table(5)
    data = table.to_json()
    assert data[3] == ["0", "-1/6"]
    assert data[0] == []
    assert AlphaTable.from_json(data) == table
