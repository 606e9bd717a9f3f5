"""The Lagrange multiplier lambda(r, s) = sum_k alpha_k(r) (s - r)^k.

alpha_0 = 0, alpha_1 = 1, alpha_2 = 0 and
alpha_k = -(alpha_{k-3} + r alpha_{k-2}) / (k (k-1)) for k >= 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from dagster import get_dagster_logger
from numpy.polynomial import polynomial as npoly

from vim_klein_gordon.core.errors import DomainError
from vim_klein_gordon.core.exact import ONE, R, ZERO, UniPoly

SUP_SAFETY = 0.05


@dataclass(frozen=True)
class AlphaTable:
    alphas: tuple[UniPoly, ...]

    @property
    def order(self) -> int:
        return len(self.alphas) - 1

    def __getitem__(self, k: int) -> UniPoly:
        return self.alphas[k]

    def to_json(self) -> list[list[str]]:
        return [alpha.to_json() for alpha in self.alphas]

    @classmethod
    def from_json(cls, data: list[list[str]]) -> AlphaTable:
        return cls(tuple(UniPoly.from_json(item) for item in data))


@dataclass(frozen=True)
class LambdaTruncation:
    """lambda_N(r, s) = sum_{k=0}^{N} alpha_k(r) (s - r)^k."""

    N: int
    table: AlphaTable

    def __post_init__(self):
        if self.N < 0:
            raise DomainError(f"truncation order must be >= 0, got {self.N}")
        if self.table.order < self.N:
            raise DomainError(
                f"alpha table of order {self.table.order} cannot back "
                f"a truncation of order {self.N}"
            )

    def alpha(self, k: int) -> UniPoly:
        if k < 0 or k > self.N:
            return ZERO
        return self.table[k]

    @cached_property
    def float_alphas(self) -> tuple[list[float], ...]:
        return tuple(
            self.alpha(k).float_coeffs() or [0.0] for k in range(self.N + 1)
        )

    def terms(self, start: int = 1):
        """Nonzero (k, j, alpha_kj) with start <= k <= N."""
        for k in range(max(start, 0), self.N + 1):
            for j, value in self.table[k].nonzero_terms():
                yield k, j, value


@dataclass(frozen=True)
class LambdaResidual:
    orders: tuple[UniPoly, ...]
    diagonal_value: UniPoly
    diagonal_slope: UniPoly


def build_alpha_table(order: int) -> AlphaTable:
    if order < 2:
        raise DomainError(f"alpha table order must be >= 2, got {order}")
    alphas = [ZERO, ONE, ZERO]
    for k in range(3, order + 1):
        alphas.append(
            (alphas[k - 3] + R * alphas[k - 2]) * Fraction(-1, k * (k - 1))
        )
    return AlphaTable(tuple(alphas))


def alpha_kj(table: AlphaTable, k: int, j: int) -> Fraction:
    if k > table.order:
        raise DomainError(f"k={k} exceeds table order {table.order}")
    return table[k].coeff(j)


def lambda_ode_residual(trunc: LambdaTruncation) -> LambdaResidual:
    """Expand lambda_N,ss + s lambda_N in powers of t = s - r.

    With s = r + t the coefficient of t^j is
    (j+2)(j+1) alpha_{j+2} + r alpha_j + alpha_{j-1}, alpha outside
    0..N being zero.
    """
    if trunc.N < 2:
        raise DomainError(f"residual needs N >= 2, got {trunc.N}")
    a = trunc.alpha
    orders = tuple(
        a(j + 2) * ((j + 2) * (j + 1)) + R * a(j) + a(j - 1)
        for j in range(trunc.N + 2)
    )
    return LambdaResidual(orders, a(0), a(1))


def _alpha_values(trunc: LambdaTruncation, r: float) -> np.ndarray:
    return np.array([npoly.polyval(r, c) for c in trunc.float_alphas])


def lambda_values(
    trunc: LambdaTruncation, r: float, s: np.ndarray
) -> np.ndarray:
    return npoly.polyval(np.asarray(s) - r, _alpha_values(trunc, r))


def sup_lambda_estimate(
    trunc: LambdaTruncation,
    radius: float,
    grid: int,
    *,
    mirrored: bool = False,
) -> float:
    """(1 + 5%) * max |lambda_N| over a grid x grid lattice of the triangle
    0 <= s <= r <= R, plus -R <= r <= s <= 0 when mirrored."""
    if radius < 0:
        raise DomainError(f"radius must be >= 0, got {radius}")
    if grid < 2:
        raise DomainError(f"grid must be >= 2, got {grid}")
    points = np.linspace(0.0, radius, grid)
    best = 0.0
    for i, r in enumerate(points):
        s = points[: i + 1]
        best = max(best, float(np.abs(lambda_values(trunc, r, s)).max()))
        if mirrored and r > 0:
            values = lambda_values(trunc, -r, -s)
            best = max(best, float(np.abs(values).max()))
    get_dagster_logger().debug(
        f"sup |lambda_{trunc.N}| on R={radius}, grid={grid}: {best}"
    )
    return (1 + SUP_SAFETY) * best
