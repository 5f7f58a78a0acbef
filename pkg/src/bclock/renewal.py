"""Renewal process with beta(1, m) jumps and wrapped gamma densities.

On [0, 1] the renewal mean function is

    M(t) = -1 - sum_k alpha_k^{-1} exp(-alpha_k t),

where alpha_1..alpha_m are the zeros of E_m(x) = sum_{k<=m} x^k / k!.
All transcendental work runs in mpmath at a configurable precision.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import NamedTuple

import mpmath
import numpy as np

from .errors import ConvergenceError, DomainError, PrecisionError
from .exact import normalized_bernoulli_poly

__all__ = [
    "DEFAULT_PRECISION",
    "RootSet",
    "WrappedGammaParams",
    "SeriesValue",
    "exponential_poly_roots",
    "mean_function",
    "mean_function_derivative",
    "ode_residual",
    "renewal_equation_residual",
    "expected_longest_run",
    "mean_run_length",
    "root_moments",
    "wrapped_gamma_density_series",
    "wrapped_gamma_closed_form",
    "wrapped_gamma_bernoulli_expansion",
    "renewal_mc_oracle",
]

DEFAULT_PRECISION = int(os.environ.get("BCLOCK_PRECISION_BITS", "128"))


def _mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


@dataclass(frozen=True)
class RootSet:
    """Certified zeros of E_m at a given working precision."""

    m: int
    roots: tuple
    residuals: tuple
    precision_bits: int

    def power_sum(self, j: int):
        with mpmath.workprec(self.precision_bits):
            return mpmath.fsum(a**j for a in self.roots)


def _exp_poly_int_coeffs(m: int) -> list:
    # m! E_m(x), highest degree first, monic
    fm = factorial(m)
    return [fm // factorial(k) for k in range(m, -1, -1)]


def _horner_with_derivative(coeffs, z):
    p = coeffs[0]
    dp = 0
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _aberth(coeffs, m: int, prec: int, max_iter: int):
    radius = max(mpmath.mpf(1), mpmath.mpf(m) / mpmath.e)
    # roots of E_m have centroid -1; the angle offset keeps guesses off the real axis
    z = [
        -1 + radius * (1 + mpmath.mpf(k) / (8 * m)) * mpmath.expj(2 * mpmath.pi * k / m + mpmath.mpf("0.4"))
        for k in range(m)
    ]
    stop = mpmath.mpf(2) ** (-prec + 8)
    for it in range(1, max_iter + 1):
        biggest = mpmath.mpf(0)
        for i in range(m):
            p, dp = _horner_with_derivative(coeffs, z[i])
            if p == 0:
                continue
            ratio = p / dp
            repulsion = mpmath.fsum(1 / (z[i] - z[j]) for j in range(m) if j != i)
            step = ratio / (1 - ratio * repulsion)
            z[i] -= step
            biggest = max(biggest, abs(step) / max(1, abs(z[i])))
        if biggest < stop:
            return z, it
    raise ConvergenceError(
        f"Aberth iteration did not converge for m={m} in {max_iter} steps",
        {"m": m, "last_step": float(biggest), "precision_bits": prec},
    )


def _pair_conjugates(z, tol):
    reals = [mpmath.mpc(w.real, 0) for w in z if abs(w.imag) <= tol]
    upper = [w for w in z if w.imag > tol]
    lower = [w for w in z if w.imag < -tol]
    if len(upper) != len(lower):
        raise ConvergenceError("roots do not come in conjugate pairs", {"upper": len(upper), "lower": len(lower)})
    paired = []
    for w in upper:
        partner = min(lower, key=lambda v: abs(v - mpmath.conj(w)))
        lower.remove(partner)
        avg = (w + mpmath.conj(partner)) / 2
        paired.extend([avg, mpmath.conj(avg)])
    return sorted(reals + paired, key=lambda w: (float(w.real), float(w.imag)))


def _certify(m: int, roots, prec: int):
    tol = mpmath.mpf(2) ** (-prec // 2)
    e_m = [mpmath.mpf(1) / factorial(k) for k in range(m, -1, -1)]
    # residual relative to sum |a|^k / k!, the scale of the rounding error
    residuals = tuple(
        abs(_horner_with_derivative(e_m, a)[0]) / _horner_with_derivative(e_m, abs(a))[0] for a in roots
    )
    if max(residuals) >= tol:
        raise ConvergenceError("root residual above tolerance", {"m": m, "max_residual": float(max(residuals))})
    for j in range(1, m + 2):
        target = -1 if j == 1 else (mpmath.mpf(1) / factorial(m) if j == m + 1 else 0)
        s = mpmath.fsum(a ** (-j) for a in roots)
        if abs(s - target) >= tol:
            raise ConvergenceError(
                f"power sum of order -{j} fails certification", {"m": m, "j": j, "error": float(abs(s - target))}
            )
    for i in range(len(roots)):
        for k in range(i + 1, len(roots)):
            if abs(roots[i] - roots[k]) < tol:
                raise ConvergenceError("roots are not distinct", {"m": m})
    return residuals


@lru_cache(maxsize=None)
def exponential_poly_roots(m: int, precision_bits: int = DEFAULT_PRECISION, max_iter: int = 500) -> RootSet:
    """Zeros of E_m by Aberth-Ehrlich iteration on the integer polynomial m! E_m."""
    if m < 1:
        raise DomainError("m must be >= 1")
    # guard bits cover the spread of the integer coefficients
    guard = 16 + factorial(m).bit_length()
    with mpmath.workprec(precision_bits + guard):
        coeffs = [mpmath.mpf(c) for c in _exp_poly_int_coeffs(m)]
        if m == 1:
            z = [mpmath.mpc(-1)]
        else:
            z, _ = _aberth(coeffs, m, precision_bits + 8, max_iter)
        roots = _pair_conjugates(z, mpmath.mpf(2) ** (-precision_bits // 2))
    with mpmath.workprec(precision_bits):
        roots = tuple(+r for r in roots)
        residuals = _certify(m, roots, precision_bits)
    return RootSet(m, roots, residuals, precision_bits)


def _roots(m, roots, precision_bits):
    if roots is None:
        return exponential_poly_roots(m, precision_bits)
    if roots.m != m:
        raise DomainError(f"root set is for m={roots.m}, not m={m}")
    return roots


def mean_function_derivative(m: int, t, k: int, roots: RootSet = None, precision_bits: int = DEFAULT_PRECISION):
    """k-th derivative of M at t (k = 0 gives M itself)."""
    rs = _roots(m, roots, precision_bits)
    with mpmath.workprec(rs.precision_bits):
        t = _mpf(t)
        s = mpmath.fsum((-a) ** k / a * mpmath.exp(-a * t) for a in rs.roots)
        value = -s - (1 if k == 0 else 0)
        if abs(value.imag) > mpmath.mpf(2) ** (-rs.precision_bits // 2) * max(1, abs(value)):
            raise ConvergenceError("mean function has a large imaginary part; bad roots", {"imag": float(value.imag)})
        return +value.real


def mean_function(m: int, t, roots: RootSet = None, precision_bits: int = DEFAULT_PRECISION):
    """Expected number of renewals by time t in [0, 1]."""
    if not 0 <= t <= 1:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    return mean_function_derivative(m, t, 0, roots, precision_bits)


def ode_residual(m: int, t, roots: RootSet = None, precision_bits: int = DEFAULT_PRECISION):
    """1 + sum_{k<=m} (-1)^k M^(k)(t) / k!, which vanishes identically."""
    rs = _roots(m, roots, precision_bits)
    with mpmath.workprec(rs.precision_bits):
        return 1 + mpmath.fsum(
            (-1) ** k * mean_function_derivative(m, t, k, rs) / factorial(k) for k in range(m + 1)
        )


def renewal_equation_residual(m: int, t, roots: RootSet = None, precision_bits: int = DEFAULT_PRECISION):
    """M(t) - P(X_1 <= t) - m int_0^t M(t-x) (1-x)^(m-1) dx by quadrature."""
    rs = _roots(m, roots, precision_bits)
    with mpmath.workprec(rs.precision_bits):
        t = _mpf(t)
        integral = mpmath.quad(lambda x: mean_function_derivative(m, t - x, 0, rs) * (1 - x) ** (m - 1), [0, t])
        return mean_function_derivative(m, t, 0, rs) - (1 - (1 - t) ** m) - m * integral


def expected_longest_run(m: int, roots: RootSet = None, precision_bits: int = DEFAULT_PRECISION):
    """The constant 1 + M(1) = -sum_k alpha_k^{-1} e^{-alpha_k}.

    This equals e for m = 1 and e (cos 1 + sin 1) for m = 2. Note that with
    L_infinity the largest l such that 1..l is a subsequence, E[L_infinity]
    is M(1), one less than this constant; see :func:`mean_run_length`.
    """
    return 1 + mean_function(m, 1, roots, precision_bits)


def mean_run_length(m: int, roots: RootSet = None, precision_bits: int = DEFAULT_PRECISION):
    """E[L_infinity] = sum_{k>=1} P(S_k <= 1) = M(1)."""
    return mean_function(m, 1, roots, precision_bits)


def _falling(x: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= x - i
    return out


def root_moments(j: int, m: int) -> Fraction:
    """mu(j, m) = sum_k alpha_k^j, exactly, by the falling-factorial recursion."""
    if j < 0:
        raise DomainError("j must be >= 0")
    if m < 1:
        raise DomainError("m must be >= 1")
    mu = []
    for jj in range(j + 1):
        s = _falling(m, jj + 1) - sum(_falling(m, i + 1) * mu[jj - i - 1] for i in range(jj))
        mu.append(s)
    return Fraction(mu[j])


# Wrapped gamma --------------------------------------------------------------


@dataclass(frozen=True)
class WrappedGammaParams:
    r: int
    lam: object
    u: object

    def __post_init__(self):
        if self.r < 1:
            raise DomainError("shape r must be a positive integer")
        if not self.lam > 0:
            raise DomainError("rate must be positive")
        if not 0 <= self.u < 1:
            raise DomainError("u must lie in [0, 1)")


class SeriesValue(NamedTuple):
    value: object
    error_bound: object
    terms: int


def wrapped_gamma_density_series(
    params: WrappedGammaParams, tol=1e-25, precision_bits: int = DEFAULT_PRECISION, max_terms: int = 10**6
) -> SeriesValue:
    """Density of gamma(r, lam) mod 1 at u by the Hurwitz-Lerch series.

    (lam^r / Gamma(r)) e^{-lam u} sum_{k>=0} (u+k)^(r-1) e^{-lam k}, cut once
    the geometric tail bound drops below ``tol``.
    """
    with mpmath.workprec(precision_bits):
        tol = _mpf(tol)
        if tol <= mpmath.mpf(2) ** (-precision_bits + 8):
            raise PrecisionError(f"tol={tol} is below what {precision_bits} bits can resolve")
        r, lam, u = params.r, _mpf(params.lam), _mpf(params.u)
        pref = lam**r / mpmath.gamma(r) * mpmath.exp(-lam * u)
        q = mpmath.exp(-lam)
        total = mpmath.mpf(0)
        for k in range(max_terms):
            term = (u + k) ** (r - 1) * q**k
            total += term
            K = k + 1
            ratio = q * (1 + mpmath.mpf(1) / K) ** (r - 1)
            if ratio < 1:
                nxt = (u + K) ** (r - 1) * q**K
                bound = pref * nxt / (1 - ratio)
                if bound < tol:
                    return SeriesValue(+(pref * total), bound, K)
        raise ConvergenceError("wrapped gamma series did not reach tolerance", {"terms": max_terms})


def wrapped_gamma_closed_form(lam, u, precision_bits: int = DEFAULT_PRECISION):
    """r = 1 case: lam e^{lam(1-u)} / (e^lam - 1)."""
    with mpmath.workprec(precision_bits):
        lam, u = _mpf(lam), _mpf(u)
        return lam * mpmath.exp(lam * (1 - u)) / mpmath.expm1(lam)


def wrapped_gamma_bernoulli_expansion(
    params: WrappedGammaParams, terms: int = 60, precision_bits: int = DEFAULT_PRECISION
) -> SeriesValue:
    """1 + sum_{n=r}^{terms} (-1)^(n-r+1) C(n-1, r-1) b_n(u) lam^n.

    b_n(u) is evaluated exactly at the rational value of u. The error bound
    sums the Fourier bound on |b_n| over the omitted terms.
    """
    r = params.r
    if terms < r:
        raise DomainError("terms must be >= r")
    with mpmath.workprec(precision_bits):
        lam = _mpf(params.lam)
        if not lam < 2 * mpmath.pi:
            raise DomainError("the expansion converges only for 0 < lambda < 2 pi")
        u = Fraction(params.u)
        total = mpmath.mpf(1)
        for n in range(r, terms + 1):
            bn = normalized_bernoulli_poly(n)(u)
            total += (-1) ** (n - r + 1) * comb(n - 1, r - 1) * _mpf(bn) * lam**n
        # |b_n| <= 2 zeta(n) / (2 pi)^n on [0, 1]; the term ratio is
        # non-increasing in n and tends to lam / (2 pi) < 1
        tail = mpmath.mpf(0)
        n = terms + 1
        x = lam / (2 * mpmath.pi)
        while True:
            t = comb(n - 1, r - 1) * 2 * mpmath.zeta(max(n, 2)) * x**n
            ratio = mpmath.mpf(n) / (n - r + 1) * x
            if ratio < 1:
                tail += t / (1 - ratio)
                break
            tail += t
            n += 1
        return SeriesValue(+total, tail, terms)


# Monte Carlo oracle -----------------------------------------------------------


def renewal_mc_oracle(m: int, t: float, trials: int, seed: int, block_size: int = 1 << 16):
    """Sample mean and standard error of N(t) with beta(1, m) jumps."""
    from .clock import block_rng

    if trials < 1:
        raise DomainError("trials must be >= 1")
    total = 0.0
    total_sq = 0.0
    done = 0
    block = 0
    while done < trials:
        size = min(block_size, trials - done)
        rng = block_rng(seed, block)
        s = np.zeros(size)
        count = np.zeros(size, dtype=np.int64)
        alive = np.ones(size, dtype=bool)
        while alive.any():
            idx = np.flatnonzero(alive)
            # beta(1, m) by inversion
            s[idx] += 1.0 - rng.random(idx.size) ** (1.0 / m)
            hit = s[idx] <= t
            count[idx[hit]] += 1
            alive[idx[~hit]] = False
        total += float(count.sum())
        total_sq += float((count.astype(np.float64) ** 2).sum())
        done += size
        block += 1
    mean = total / trials
    var = max(total_sq / trials - mean**2, 0.0) * trials / max(trials - 1, 1)
    return mean, (var / trials) ** 0.5
