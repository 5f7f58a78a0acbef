"""Exact rational polynomials and Bernoulli numbers/polynomials.

Scalars are :class:`fractions.Fraction` throughout; nothing in this module
rounds.
"""
from __future__ import annotations

import threading
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, gcd
from typing import Iterable, Union

__all__ = [
    "RationalPolynomial",
    "X",
    "bernoulli_number",
    "bernoulli_poly",
    "normalized_bernoulli_poly",
    "poly_eval",
    "poly_derivative",
    "poly_antiderivative_zero_mean",
]

Scalar = Union[int, Fraction]


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


class RationalPolynomial:
    """Dense univariate polynomial with Fraction coefficients.

    ``coeffs[i]`` is the coefficient of ``x**i``. Trailing zeros are
    stripped, so the zero polynomial has an empty coefficient tuple.
    Instances are immutable and hashable.
    """

    __slots__ = ("_c", "_int_form")

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        c = [Fraction(a) for a in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self._c = tuple(c)
        self._int_form = None

    @classmethod
    def monomial(cls, k: int, coeff: Scalar = 1) -> "RationalPolynomial":
        return cls([0] * k + [coeff])

    @classmethod
    def constant(cls, a: Scalar) -> "RationalPolynomial":
        return cls([a])

    @property
    def coeffs(self) -> tuple:
        return self._c

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return not self._c

    def coeff(self, i: int) -> Fraction:
        return self._c[i] if 0 <= i < len(self._c) else Fraction(0)

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self._c), len(other._c))
        return RationalPolynomial(self.coeff(i) + other.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial(-a for a in self._c)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalPolynomial(a * other for a in self._c)
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return RationalPolynomial()
        out = [Fraction(0)] * (len(self._c) + len(other._c) - 1)
        for i, a in enumerate(self._c):
            if a:
                for j, b in enumerate(other._c):
                    out[i + j] += a * b
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result, base = RationalPolynomial([1]), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._c == other._c

    def __hash__(self):
        return hash(self._c)

    # evaluation -----------------------------------------------------------

    def _integer_form(self):
        # (common denominator, integer numerators) for fast exact evaluation
        if self._int_form is None:
            den = 1
            for a in self._c:
                den = _lcm(den, a.denominator)
            self._int_form = (den, tuple(a.numerator * (den // a.denominator) for a in self._c))
        return self._int_form

    def __call__(self, x):
        if isinstance(x, RationalPolynomial):
            return self.compose(x)
        if isinstance(x, (int, Fraction)):
            x = Fraction(x)
            if not self._c:
                return Fraction(0)
            den, nums = self._integer_form()
            p, q = x.numerator, x.denominator
            # sum nums[i] p^i q^(d-i), Horner in integers
            acc = 0
            qpow = 1
            for a in reversed(nums):
                acc = acc * p + a * qpow
                qpow *= q
            return Fraction(acc, den * q ** (len(nums) - 1))
        acc = 0
        for a in reversed(self._c):
            acc = acc * x + _to_number(a, x)
        return acc

    def compose(self, inner: "RationalPolynomial") -> "RationalPolynomial":
        """Return ``self(inner(x))``."""
        acc = RationalPolynomial()
        for a in reversed(self._c):
            acc = acc * inner + a
        return acc

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial(i * a for i, a in enumerate(self._c) if i)

    def antiderivative(self) -> "RationalPolynomial":
        """Primitive vanishing at 0."""
        return RationalPolynomial([0] + [a / (i + 1) for i, a in enumerate(self._c)])

    def integral01(self) -> Fraction:
        return sum((a / (i + 1) for i, a in enumerate(self._c)), Fraction(0))

    def reversed_coeffs(self) -> "RationalPolynomial":
        """``x**deg * p(1/x)``."""
        return RationalPolynomial(reversed(self._c))

    def __repr__(self):
        return f"RationalPolynomial({[str(a) for a in self._c]})"

    def __str__(self):
        if not self._c:
            return "0"
        terms = []
        for i, a in enumerate(self._c):
            if a == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and a == 1:
                terms.append(mono)
            elif mono and a == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{a}{'*' + mono if mono else ''}")
        return " + ".join(terms).replace("+ -", "- ")


def _coerce(obj):
    if isinstance(obj, RationalPolynomial):
        return obj
    if isinstance(obj, (int, Fraction)):
        return RationalPolynomial([obj])
    return NotImplemented


def _to_number(a: Fraction, like):
    # Convert an exact coefficient into the numeric type of ``like``
    # (mpmath mpf/mpc, float, ...) without a detour through float.
    mod = type(like).__module__
    if mod.startswith("mpmath"):
        import mpmath

        return mpmath.mpf(a.numerator) / a.denominator
    return a.numerator / a.denominator


X = RationalPolynomial([0, 1])


# Bernoulli numbers -----------------------------------------------------------

_bern_lock = threading.Lock()
_bern_cache: list = [Fraction(1)]


def bernoulli_number(n: int) -> Fraction:
    """B_n with the convention B_1 = -1/2.

    Uses B_n = -1/(n+1) * sum_{k<n} C(n+1, k) B_k, memoized.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n < len(_bern_cache):
        return _bern_cache[n]
    with _bern_lock:
        while len(_bern_cache) <= n:
            m = len(_bern_cache)
            if m >= 3 and m % 2:
                _bern_cache.append(Fraction(0))
                continue
            s = sum((comb(m + 1, k) * _bern_cache[k] for k in range(m) if _bern_cache[k]), Fraction(0))
            _bern_cache.append(-s / (m + 1))
    return _bern_cache[n]


@lru_cache(maxsize=None)
def bernoulli_poly(n: int) -> RationalPolynomial:
    """B_n(x) = sum_k C(n, k) B_{n-k} x^k."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return RationalPolynomial(comb(n, k) * bernoulli_number(n - k) for k in range(n + 1))


@lru_cache(maxsize=None)
def normalized_bernoulli_poly(n: int) -> RationalPolynomial:
    """b_n(x) = B_n(x) / n!."""
    return bernoulli_poly(n) / factorial(n)


def poly_eval(p: RationalPolynomial, x: Scalar) -> Fraction:
    return p(Fraction(x))


def poly_derivative(p: RationalPolynomial) -> RationalPolynomial:
    return p.derivative()


def poly_antiderivative_zero_mean(p: RationalPolynomial) -> RationalPolynomial:
    """The unique primitive of ``p`` whose integral over [0, 1] is zero."""
    prim = p.antiderivative()
    return prim - prim.integral01()

