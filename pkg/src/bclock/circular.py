"""Circular convolution of polynomials on the circle R/Z = [0, 1).

For polynomials f, g on [0, 1) the convolution

    (f * g)(u) = int_0^1 f(v) g((u - v) mod 1) dv

is again a polynomial on [0, 1), so everything here stays exact.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

import mpmath

from .exact import RationalPolynomial, normalized_bernoulli_poly

__all__ = [
    "monomial_circular_conv",
    "circular_conv",
    "circular_power",
    "b1_conv_power",
    "quadrature_conv_oracle",
]


def _rising(a: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= a + i
    return out


@lru_cache(maxsize=None)
def monomial_circular_conv(m: int, n: int) -> RationalPolynomial:
    """x^m (*) x^n on [0, 1) in closed form."""
    if m < 0 or n < 0:
        raise ValueError("exponents must be nonnegative")
    if m == 0:
        return RationalPolynomial([Fraction(1, n + 1)])
    if n == 0:
        return RationalPolynomial([Fraction(1, m + 1)])
    coeffs = [Fraction(0)] * (m + n + 1)
    coeffs[0] = Fraction(factorial(n) * factorial(m), factorial(n + m + 1))
    for k in range(n):
        w = Fraction(factorial(n), factorial(n - k) * _rising(m + 1, k + 1))
        coeffs[n - k] += w
        coeffs[m + k + 1] -= w
    return RationalPolynomial(coeffs)


def circular_conv(f: RationalPolynomial, g: RationalPolynomial) -> RationalPolynomial:
    """Bilinear extension of :func:`monomial_circular_conv`."""
    out = [Fraction(0)] * (max(f.degree + g.degree + 2, 1))
    for i, a in enumerate(f.coeffs):
        if not a:
            continue
        for j, b in enumerate(g.coeffs):
            if not b:
                continue
            ab = a * b
            for k, c in enumerate(monomial_circular_conv(i, j).coeffs):
                out[k] += ab * c
    return RationalPolynomial(out)


def circular_power(f: RationalPolynomial, n: int) -> RationalPolynomial:
    if n < 1:
        raise ValueError("n must be >= 1")
    acc = f
    for _ in range(n - 1):
        acc = circular_conv(acc, f)
    return acc


def b1_conv_power(n: int) -> RationalPolynomial:
    """n-fold circular convolution of b_1(x) = x - 1/2 with itself."""
    return circular_power(normalized_bernoulli_poly(1), n)


def quadrature_conv_oracle(f, g, u, grid: int, prec: int = 128):
    """Midpoint-rule value of (f (*) g)(u), for cross-checking in tests.

    The integral is split at v = u, where g(u - v mod 1) jumps, so each
    piece is smooth and the rule is second order.
    """
    if grid < 16:
        raise ValueError("grid must be >= 16")
    with mpmath.workprec(prec):
        u = mpmath.mpf(Fraction(u).numerator) / Fraction(u).denominator
        n_left = int(mpmath.nint(grid * u))
        n_right = grid - n_left
        total = mpmath.mpf(0)
        if n_left:
            h = u / n_left
            total += h * mpmath.fsum(
                f(v) * g(u - v) for v in (h * (i + mpmath.mpf(0.5)) for i in range(n_left))
            )
        if n_right:
            h = (1 - u) / n_right
            total += h * mpmath.fsum(
                f(v) * g(1 + u - v) for v in (u + h * (i + mpmath.mpf(0.5)) for i in range(n_right))
            )
        return total
