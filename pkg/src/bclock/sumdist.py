"""Exact law of S_n = X_1 + ... + X_n with independent X_i ~ beta(1, m_i).

The CDF is obtained by inverting the Laplace transform term by term with

    int_0^inf theta e^{-theta t} (t - k)_+^p / p! dt = e^{-k theta} / theta^p,

so every CDF here is a finite sum of truncated powers c (x - k)_+^p / p!.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, floor, prod

from .clock import MultisetSpec
from .errors import DomainError
from .exact import RationalPolynomial

__all__ = [
    "BetaSumSpec",
    "PiecewiseCdf",
    "cdf_beta12_sum",
    "piecewise_cdf_beta12",
    "dist_D",
    "a_count",
    "alpha_coefficients",
    "cdf_general",
    "piecewise_cdf_general",
    "complete_count",
    "prob_L_ge",
]

BetaSumSpec = MultisetSpec


def _check_x(x, n):
    x = Fraction(x)
    if not 0 <= x <= n:
        raise DomainError(f"x must lie in [0, {n}], got {x}")
    return x


def _eval_terms(terms, x: Fraction) -> Fraction:
    total = Fraction(0)
    for k, p, c in terms:
        if x > k:
            total += c * (x - k) ** p / factorial(p)
    return total


@dataclass(frozen=True)
class PiecewiseCdf:
    """Polynomial pieces of a CDF on [k, k+1), k = 0..n-1."""

    n: int
    pieces: tuple  # (knot, RationalPolynomial)

    def __call__(self, x) -> Fraction:
        x = _check_x(x, self.n)
        k = min(floor(x), self.n - 1)
        return self.pieces[k][1](x)

    @classmethod
    def from_terms(cls, n: int, terms) -> "PiecewiseCdf":
        X = RationalPolynomial([0, 1])
        pieces = []
        acc = RationalPolynomial()
        for knot in range(n):
            for k, p, c in terms:
                if k == knot:
                    acc = acc + (X - k) ** p * Fraction(c, factorial(p))
            pieces.append((knot, acc))
        return cls(n, tuple(pieces))


def _beta12_terms(n: int):
    two_n = 2**n
    return [
        (k, 2 * n - j, (-1) ** (n - k - j) * two_n * comb(n, k) * comb(n - k, j))
        for k in range(n + 1)
        for j in range(n - k + 1)
    ]


def cdf_beta12_sum(n: int, x) -> Fraction:
    """P(S_n <= x) for n i.i.d. beta(1, 2) summands, 0 <= x <= n."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return _eval_terms(_beta12_terms(n), _check_x(x, n))


@lru_cache(maxsize=None)
def piecewise_cdf_beta12(n: int) -> PiecewiseCdf:
    if n < 1:
        raise DomainError("n must be >= 1")
    return PiecewiseCdf.from_terms(n, _beta12_terms(n))


def dist_D(n: int) -> tuple:
    """P(D_n = d) = P(S_n <= d+1) - P(S_n <= d) for d = 0..n-1."""
    F = piecewise_cdf_beta12(n)
    vals = [F(k) for k in range(n + 1)]
    return tuple(vals[d + 1] - vals[d] for d in range(n))


def a_count(n: int) -> int:
    """Permutations of 1^2 ... n^2 that finish without a lap."""
    if n < 1:
        raise DomainError("n must be >= 1")
    f2n = factorial(2 * n)
    return sum((-1) ** (n - j) * comb(n, j) * (f2n // factorial(2 * n - j)) for j in range(n + 1))


def _exp_poly_neg(m: int) -> RationalPolynomial:
    # E_m(-theta) = sum_{i<=m} (-theta)^i / i!
    return RationalPolynomial(Fraction((-1) ** i, factorial(i)) for i in range(m + 1))


@lru_cache(maxsize=None)
def alpha_coefficients(multiplicities: tuple) -> dict:
    """prod_i (X - E_{m_i-1}(-theta)) as {k: polynomial in theta}."""
    poly = {0: RationalPolynomial([1])}
    for m in multiplicities:
        e = _exp_poly_neg(m - 1)
        new = {}
        for k, c in poly.items():
            new[k + 1] = new.get(k + 1, RationalPolynomial()) + c
            new[k] = new.get(k, RationalPolynomial()) - c * e
        poly = new
    return {k: c for k, c in poly.items() if not c.is_zero()}


def _general_terms(spec: MultisetSpec):
    M = spec.M
    scale = (-1) ** M * prod(factorial(m) for m in spec.multiplicities)
    terms = []
    for k, theta_poly in sorted(alpha_coefficients(spec.multiplicities).items()):
        for j, a in enumerate(theta_poly.coeffs):
            if a and j <= M:
                # e^{-k theta} / theta^{M-j} inverts to (x-k)_+^{M-j} / (M-j)!
                terms.append((k, M - j, scale * a))
    return terms


def cdf_general(spec: MultisetSpec, x) -> Fraction:
    """P(S_n <= x) for independent beta(1, m_i) summands."""
    return _eval_terms(_general_terms(spec), _check_x(x, spec.n))


def piecewise_cdf_general(spec: MultisetSpec) -> PiecewiseCdf:
    return PiecewiseCdf.from_terms(spec.n, _general_terms(spec))


def complete_count(spec: MultisetSpec) -> int:
    """Number of permutations of the multiset containing 1, 2, ..., n in order.

    Computed as (-1)^M sum_j M! c_j / (M-j)! with
    c_j = (-1)^n [theta^j] prod_i E_{m_i-1}(-theta).
    """
    M, n = spec.M, spec.n
    prod_e = RationalPolynomial([1])
    for m in spec.multiplicities:
        prod_e = prod_e * _exp_poly_neg(m - 1)
    total = Fraction(0)
    for j, a in enumerate(prod_e.coeffs):
        c_j = (-1) ** n * a
        total += c_j * Fraction(factorial(M), factorial(M - j))
    total *= (-1) ** M
    if total.denominator != 1:
        raise ArithmeticError(f"non-integer count {total} for spec {spec}")
    return total.numerator


def prob_L_ge(spec: MultisetSpec, k: int) -> Fraction:
    """P(L_n >= k) = P(S_k <= 1)."""
    if not 1 <= k <= spec.n:
        raise DomainError(f"k must lie in 1..{spec.n}, got {k}")
    return cdf_general(spec.prefix(k), 1)
