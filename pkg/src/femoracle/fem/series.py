"""Truncated series for arccos(sqrt(x)) as a polynomial in y = sqrt(x).

arccos(y) = pi/2 - arcsin(y) and arcsin(y) = sum_m a_m y^(2m+1) with
a_m = C(2m, m) / (4^m (2m + 1)).  The "printed" variant drops the y^3 term
and shifts the later coefficients down by one power, reproducing a
printed expansion that is kept for comparison only.
"""

from __future__ import annotations

import math
from fractions import Fraction

from ..fixedpoint import FixedPointFormat
from ..mulpoly import PolynomialSpec

STANDARD = "standard"
PRINTED = "printed"
VARIANTS = (STANDARD, PRINTED)

HALF_PI = Fraction(math.pi) / 2


def arcsin_coefficient(m: int) -> Fraction:
    return Fraction(math.comb(2 * m, m), 4 ** m * (2 * m + 1))


def series_coefficients(K: int, variant: str = STANDARD) -> list[Fraction]:
    """The K odd-power coefficients a_0..a_{K-1} subtracted from pi/2."""
    if K < 1:
        raise ValueError("series order K must be >= 1")
    if variant == STANDARD:
        return [arcsin_coefficient(m) for m in range(K)]
    if variant == PRINTED:
        return [Fraction(1)] + [arcsin_coefficient(m + 1) for m in range(1, K)]
    raise ValueError(f"unknown series variant {variant!r}")


def series_polynomial(K: int, variant: str = STANDARD) -> list[Fraction]:
    """Dense coefficients c_0..c_{2K-1} in y."""
    coeffs = [Fraction(0)] * (2 * K)
    coeffs[0] = HALF_PI
    for m, a in enumerate(series_coefficients(K, variant)):
        coeffs[2 * m + 1] = -a
    return coeffs


def arccos_series_spec(K: int, fmt: FixedPointFormat, variant: str = STANDARD) -> PolynomialSpec:
    return PolynomialSpec(series_polynomial(K, variant), fmt)


def series_value(x, K: int, variant: str = STANDARD) -> float:
    y = math.sqrt(float(x))
    return float(HALF_PI) - sum(float(a) * y ** (2 * m + 1)
                                for m, a in enumerate(series_coefficients(K, variant)))
