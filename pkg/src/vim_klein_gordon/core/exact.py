"""Exact rationals and dense univariate polynomials in r.

`Rational` is `fractions.Fraction`, which keeps a positive denominator and
a reduced numerator after every operation. `UniPoly` stores coefficients
by power of r with trailing zeros stripped, so the zero polynomial is the
empty tuple and has degree -1.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Union

Rational = Fraction
Scalar = Union[int, Fraction]


def rational_to_str(value: Scalar) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rational_from_str(text: str) -> Fraction:
    return Fraction(text.strip())


class UniPoly:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        terms = [Fraction(c) for c in coeffs]
        while terms and terms[-1] == 0:
            terms.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(terms)

    @classmethod
    def constant(cls, value: Scalar) -> UniPoly:
        return cls((value,))

    @classmethod
    def monomial(cls, power: int, value: Scalar = 1) -> UniPoly:
        if power < 0:
            raise ValueError(f"negative power {power}")
        return cls([0] * power + [value])

    @classmethod
    def from_terms(cls, terms: dict[int, Scalar]) -> UniPoly:
        if not terms:
            return ZERO
        dense = [Fraction(0)] * (max(terms) + 1)
        for power, value in terms.items():
            dense[power] += value
        return cls(dense)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, power: int) -> Fraction:
        if 0 <= power < len(self.coeffs):
            return self.coeffs[power]
        return Fraction(0)

    def nonzero_terms(self) -> Iterator[tuple[int, Fraction]]:
        for power, value in enumerate(self.coeffs):
            if value:
                yield power, value

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == UniPoly.constant(other).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"UniPoly({[rational_to_str(c) for c in self.coeffs]!r})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for power, value in self.nonzero_terms():
            text = rational_to_str(value)
            if power == 0:
                parts.append(text)
            elif power == 1:
                parts.append(f"{text}*r")
            else:
                parts.append(f"{text}*r^{power}")
        return " + ".join(parts)

    def __add__(self, other: UniPoly | Scalar) -> UniPoly:
        if not isinstance(other, UniPoly):
            other = UniPoly.constant(other)
        size = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(self.coeff(i) + other.coeff(i) for i in range(size))

    __radd__ = __add__

    def __neg__(self) -> UniPoly:
        return UniPoly(-c for c in self.coeffs)

    def __sub__(self, other: UniPoly | Scalar) -> UniPoly:
        if not isinstance(other, UniPoly):
            other = UniPoly.constant(other)
        return self + (-other)

    def __rsub__(self, other: Scalar) -> UniPoly:
        return UniPoly.constant(other) - self

    def __mul__(self, other: UniPoly | Scalar) -> UniPoly:
        if not isinstance(other, UniPoly):
            factor = Fraction(other)
            return UniPoly(c * factor for c in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return ZERO
        product = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in self.nonzero_terms():
            for j, b in other.nonzero_terms():
                product[i + j] += a * b
        return UniPoly(product)

    __rmul__ = __mul__

    def __call__(self, x: Scalar) -> Fraction:
        return poly_eval(self, Fraction(x))

    def derivative(self) -> UniPoly:
        return UniPoly(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def shift(self, power: int) -> UniPoly:
        """Multiply by r**power."""
        if not self.coeffs:
            return ZERO
        return UniPoly([0] * power + list(self.coeffs))

    def truncate(self, max_degree: int) -> UniPoly:
        return UniPoly(self.coeffs[: max_degree + 1])

    def max_abs_coeff(self, upto: int | None = None) -> Fraction:
        coeffs = self.coeffs if upto is None else self.coeffs[: upto + 1]
        return max((abs(c) for c in coeffs), default=Fraction(0))

    def float_coeffs(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def to_json(self) -> list[str]:
        return [rational_to_str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: list[str]) -> UniPoly:
        return cls(rational_from_str(item) for item in data)


ZERO = UniPoly()
ONE = UniPoly((1,))
R = UniPoly((0, 1))


def poly_add(p: UniPoly, q: UniPoly) -> UniPoly:
    return p + q


def poly_mul(p: UniPoly, q: UniPoly) -> UniPoly:
    return p * q


def poly_eval(p: UniPoly, x: Scalar) -> Fraction:
    """Horner evaluation, exact."""
    x = Fraction(x)
    total = Fraction(0)
    for c in reversed(p.coeffs):
        total = total * x + c
    return total
