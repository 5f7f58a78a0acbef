"""Bernstein-basis expansions, the exact law of I_n, and the conjecture probes.

The internal basis is the density-normalized one,

    f_{k:N}(u) = N * C(N-1, k-1) * u^(k-1) * (1-u)^(N-k),   1 <= k <= N,

i.e. the beta(k, N+1-k) densities. The classical basis differs from it
only by the factor N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import mpmath

from .errors import DomainError, PrecisionError
from .exact import RationalPolynomial, bernoulli_number, normalized_bernoulli_poly

__all__ = [
    "BernsteinExpansion",
    "DistributionVector",
    "bernstein_density",
    "classical_bernstein",
    "monomial_to_bernstein",
    "to_bernstein",
    "bernoulli_in_bernstein",
    "delta_vector",
    "p_vector_exact",
    "clock_density_coefficients",
    "max_multiplier_c",
    "conjecture1_brackets",
    "conjecture1_gap",
    "conjecture2_probe",
]


@dataclass(frozen=True)
class BernsteinExpansion:
    """sum_k coeffs[k-1] * f_{k:N}."""

    N: int
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.N:
            raise ValueError(f"expected {self.N} coefficients, got {len(self.coeffs)}")

    def to_polynomial(self) -> RationalPolynomial:
        out = RationalPolynomial()
        for k, c in enumerate(self.coeffs, start=1):
            if c:
                out = out + bernstein_density(k, self.N) * c
        return out

    def to_classical(self) -> tuple:
        """Coefficients in the basis C(N-1,k-1) u^(k-1) (1-u)^(N-k)."""
        return tuple(c * self.N for c in self.coeffs)

    def is_mixture(self) -> bool:
        return all(c >= 0 for c in self.coeffs) and sum(self.coeffs) == 1


@dataclass(frozen=True)
class DistributionVector:
    """Exact vector indexed by k = 1..2n.

    ``kind`` is ``"p"`` for the law of I_n and ``"delta"`` for its deviation
    from the uniform law on {1, ..., 2n}.
    """

    n: int
    values: tuple
    kind: str = "p"

    def __post_init__(self):
        if self.kind not in ("p", "delta"):
            raise ValueError(f"unknown kind {self.kind!r}")
        total = sum(self.values, Fraction(0))
        if self.kind == "p":
            if total != 1 or any(v < 0 for v in self.values):
                raise ValueError("not a probability vector")
        elif total != 0:
            raise ValueError("deviation vector must sum to zero")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def scaled(self, factor) -> tuple:
        return tuple(v * factor for v in self.values)


@lru_cache(maxsize=None)
def bernstein_density(k: int, N: int) -> RationalPolynomial:
    """f_{k:N}, the beta(k, N+1-k) density."""
    if not 1 <= k <= N:
        raise DomainError(f"need 1 <= k <= N, got k={k}, N={N}")
    return classical_bernstein(k, N) * N


@lru_cache(maxsize=None)
def classical_bernstein(k: int, N: int) -> RationalPolynomial:
    if not 1 <= k <= N:
        raise DomainError(f"need 1 <= k <= N, got k={k}, N={N}")
    u = RationalPolynomial([0, 1])
    return (u ** (k - 1)) * (1 - u) ** (N - k) * comb(N - 1, k - 1)


def monomial_to_bernstein(i: int, N: int) -> BernsteinExpansion:
    """x^i = sum_{j>i} C(j-1, i) / (N C(N-1, i)) f_{j:N}(x)."""
    if not 0 <= i < N:
        raise DomainError(f"need 0 <= i < N, got i={i}, N={N}")
    scale = N * comb(N - 1, i)
    return BernsteinExpansion(N, tuple(Fraction(comb(j - 1, i), scale) for j in range(1, N + 1)))


def to_bernstein(p: RationalPolynomial, N: int) -> BernsteinExpansion:
    """Expand a polynomial of degree < N in the density basis of size N."""
    if p.degree >= N:
        raise DomainError(f"degree {p.degree} does not fit a basis of size {N}")
    out = [Fraction(0)] * N
    for i, a in enumerate(p.coeffs):
        if a:
            for j, c in enumerate(monomial_to_bernstein(i, N).coeffs):
                out[j] += a * c
    return BernsteinExpansion(N, tuple(out))


def bernoulli_in_bernstein(n: int, N: int) -> BernsteinExpansion:
    """b_n in the density basis f_{1:N}, ..., f_{N:N} (requires n < N).

    Coefficient j is sum_i C(j-1,i) C(n,i) B_{n-i} / (n! N C(N-1,i)).
    """
    if not 0 <= n < N:
        raise DomainError(f"need 0 <= n < N, got n={n}, N={N}")
    weights = [
        Fraction(comb(n, i), factorial(n) * N * comb(N - 1, i)) * bernoulli_number(n - i)
        for i in range(n + 1)
    ]
    coeffs = tuple(
        sum((comb(j - 1, i) * w for i, w in enumerate(weights) if i <= j - 1), Fraction(0))
        for j in range(1, N + 1)
    )
    return BernsteinExpansion(N, coeffs)


@lru_cache(maxsize=64)
def delta_vector(n: int) -> DistributionVector:
    """delta_k = 1/(2n) - P(I_n = k) for k = 1..2n, in closed form."""
    if n < 1:
        raise DomainError("n must be >= 1")
    w = [Fraction(comb(n, i), comb(2 * n - 1, i)) * bernoulli_number(n - i) for i in range(n + 1)]
    den = 1
    for x in w:
        den = den * x.denominator // math.gcd(den, x.denominator)
    wi = [x.numerator * (den // x.denominator) for x in w]
    prefactor = Fraction(2 ** (n - 1), n * factorial(n) * den)
    values = []
    for k in range(1, 2 * n + 1):
        s = sum(comb(k - 1, i) * wi[i] for i in range(min(n, k - 1) + 1))
        values.append(prefactor * s)
    return DistributionVector(n, tuple(values), "delta")


def p_vector_exact(n: int) -> DistributionVector:
    """Law of the stopping index I_n of the Bernoulli clock."""
    delta = delta_vector(n)
    u = Fraction(1, 2 * n)
    return DistributionVector(n, tuple(u - d for d in delta.values), "p")


def clock_density_coefficients(n: int, multiplier=None, N=None) -> BernsteinExpansion:
    """Density-basis coefficients of 1 - c*b_n(x), with c = 2^n by default.

    N defaults to n + 1 (Bernstein polynomials of degree n).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    N = n + 1 if N is None else N
    c = 2**n if multiplier is None else Fraction(multiplier)
    bn = bernoulli_in_bernstein(n, N).coeffs
    return BernsteinExpansion(N, tuple(Fraction(1, N) - c * b for b in bn))


def max_multiplier_c(n: int, basis: str = "density"):
    """Largest c with every degree-n Bernstein coefficient of 1 - c b_n >= 0.

    ``basis`` selects density-normalized or classical coefficients. The
    answer is the same in both because the bases differ by a positive
    constant factor. Returns ``math.inf`` if b_n has no positive coefficient.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    N = n + 1
    exp = bernoulli_in_bernstein(n, N)
    if basis == "density":
        uniform, bn = [Fraction(1, N)] * N, exp.coeffs
    elif basis == "classical":
        uniform, bn = [Fraction(1)] * N, exp.to_classical()
    else:
        raise ValueError(f"unknown basis {basis!r}")
    ratios = [a / b for a, b in zip(uniform, bn) if b > 0]
    return min(ratios) if ratios else math.inf


def conjecture1_brackets(n: int, grid: str = "2n-1") -> list:
    """Exact values 2n delta_{k:2n} - 2^n b_n(x_k) for k = 1..2n.

    x_k = (k-1)/(2n-1) by default; ``grid="2n"`` uses (k-1)/(2n).
    Multiplying by pi^n gives the quantity in the first conjecture.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if grid == "2n-1":
        den = 2 * n - 1
    elif grid == "2n":
        den = 2 * n
    else:
        raise ValueError(f"unknown grid {grid!r}")
    delta = delta_vector(n).values
    bn = normalized_bernoulli_poly(n)
    two_n = 2**n
    return [2 * n * delta[k - 1] - two_n * bn(Fraction(k - 1, den)) for k in range(1, 2 * n + 1)]


def conjecture1_gap(n: int, precision_bits: int = 256, grid: str = "2n-1", with_argmax: bool = False):
    """sup_k |2n pi^n delta_{k:2n} - (2 pi)^n b_n(x_k)|.

    The bracket is exact; only the final multiplication by pi^n is done in
    interval arithmetic at ``precision_bits``. Raises PrecisionError if the
    enclosure is not tight to 10 leading bits.
    """
    if precision_bits < 64:
        raise DomainError("precision_bits must be >= 64")
    brackets = conjecture1_brackets(n, grid)
    absb = [abs(b) for b in brackets]
    k_best = max(range(len(absb)), key=absb.__getitem__)
    best = absb[k_best]
    with mpmath.workprec(precision_bits):
        iv = mpmath.iv
        iv.prec = precision_bits
        enclosure = iv.pi**n * (iv.mpf(best.numerator) / iv.mpf(best.denominator))
        lo, hi = enclosure.a, enclosure.b
        value = mpmath.mpf(mpmath.pi) ** n * mpmath.mpf(best.numerator) / best.denominator
        if best != 0 and (hi - lo) > abs(value) * mpmath.mpf(2) ** -10:
            raise PrecisionError(f"{precision_bits} bits do not resolve the gap at n={n}")
        value = +value
    if with_argmax:
        return value, k_best + 1
    return value


def conjecture2_probe(max_n: int) -> list:
    """Check positivity of the degree-n Bernstein coefficients of 1 - 2^n b_n.

    Returns one record per n; a violation is reported, never raised.
    """
    rows = []
    for n in range(1, max_n + 1):
        coeffs = clock_density_coefficients(n).to_classical()
        c_n = max_multiplier_c(n)
        rows.append(
            {
                "n": n,
                "min_coefficient": min(coeffs),
                "c_n": c_n,
                "two_pow_n": 2**n,
                "holds": all(c >= 0 for c in coeffs),
            }
        )
    return rows
