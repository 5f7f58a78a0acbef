from fractions import Fraction
from math import comb, factorial, prod

import numpy as np
import pytest
from hypothesis import given

from bclock.clock import MultisetSpec, simulate_batch
from bclock.errors import DomainError
from bclock.exact import RationalPolynomial
from bclock.sumdist import (
    _exp_poly_neg,
    a_count,
    cdf_beta12_sum,
    cdf_general,
    complete_count,
    dist_D,
    piecewise_cdf_beta12,
    piecewise_cdf_general,
    prob_L_ge,
)
from conftest import unit_fractions

F = Fraction
LAP_COUNTS = {
    2: (5, 1),
    3: (47, 42, 1),
    4: (641, 1659, 219, 1),
    5: (11389, 72572, 28470, 968, 1),
    6: (248749, 3610485, 3263402, 357746, 4017, 1),
}


def compositions(M):
    if M == 0:
        yield ()
        return
    for first in range(1, M + 1):
        for rest in compositions(M - first):
            yield (first,) + rest


def _probes(n, count):
    return [F(i * n, count - 1) for i in range(count)]


def _beta_sum_mc(mult, trials, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    s = np.zeros(trials)
    for m in mult:
        s += 1.0 - rng.random(trials) ** (1.0 / m)
    return s


@given(unit_fractions)
def test_single_summand_is_beta_cdf(x):
    assert cdf_beta12_sum(1, x) == 2 * x - x * x


def test_beta12_examples():
    assert cdf_beta12_sum(2, 1) == F(5, 6)
    assert cdf_beta12_sum(3, 1) == F(47, 90)
    with pytest.raises(DomainError):
        cdf_beta12_sum(2, 3)
    with pytest.raises(DomainError):
        cdf_beta12_sum(2, -1)


@pytest.mark.parametrize("n", range(1, 9))
def test_cdf_monotone_with_exact_endpoints(n):
    xs = _probes(n, 64)
    vals = [cdf_beta12_sum(n, x) for x in xs]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[0] == 0 and vals[-1] == 1
    pw = piecewise_cdf_beta12(n)
    assert [pw(x) for x in xs] == vals


@pytest.mark.parametrize("n", range(1, 9))
def test_general_cdf_reduces_to_pairs(n):
    spec = MultisetSpec.pairs(n)
    for x in _probes(n, 32):
        assert cdf_general(spec, x) == cdf_beta12_sum(n, x)


@pytest.mark.parametrize("n", range(1, 8))
def test_all_uniform_summands_match_irwin_hall(n):
    spec = MultisetSpec((1,) * n)
    for x in _probes(n, 17):
        ref = sum((-1) ** k * comb(n, k) * (x - k) ** n for k in range(int(x) + 1) if x > k) / factorial(n)
        assert cdf_general(spec, x) == ref


def test_general_examples():
    assert cdf_general(MultisetSpec((2, 2)), 1) == F(5, 6)
    assert cdf_general(MultisetSpec((1, 1, 1)), 1) == F(1, 6)
    assert cdf_general(MultisetSpec((2, 3)), 2) == 1


@pytest.mark.parametrize("x", [F(1, 2), F(1), F(3, 2)])
def test_general_cdf_against_monte_carlo(x):
    spec = MultisetSpec((2, 3))
    T = 10**6
    s = _beta_sum_mc((2, 3), T, seed=12)
    p_hat = float(np.mean(s <= float(x)))
    exact = float(cdf_general(spec, x))
    sigma = (exact * (1 - exact) / T) ** 0.5
    assert abs(p_hat - exact) <= 3 * sigma + 1e-12


def test_piecewise_general_matches_direct():
    spec = MultisetSpec((1, 3, 2))
    pw = piecewise_cdf_general(spec)
    for x in _probes(3, 25):
        assert pw(x) == cdf_general(spec, x)


@pytest.mark.parametrize("n", sorted(LAP_COUNTS))
def test_lap_count_rows(n):
    scale = factorial(2 * n) // 2**n
    counts = tuple(p * scale for p in dist_D(n))
    assert all(c.denominator == 1 for c in counts)
    assert counts == LAP_COUNTS[n]


def test_a_count_values():
    assert [a_count(n) for n in range(1, 7)] == [1, 5, 47, 641, 11389, 248749]
    for n in range(1, 9):
        assert a_count(n) == cdf_beta12_sum(n, 1) * factorial(2 * n) / 2**n
    for n in range(1, 7):
        assert a_count(n) == complete_count(MultisetSpec.pairs(n))


def test_complete_count_examples():
    for n in range(1, 9):
        assert complete_count(MultisetSpec((1,) * n)) == 1
    assert complete_count(MultisetSpec((2, 2))) == 5
    assert complete_count(MultisetSpec((2, 2, 2))) == 47


@pytest.mark.parametrize("M", range(1, 13))
def test_complete_count_is_scaled_probability(M):
    for mult in compositions(M):
        spec = MultisetSpec(mult)
        c = complete_count(spec)
        assert F(c * prod(factorial(m) for m in mult), factorial(M)) == prob_L_ge(spec, spec.n)


def test_prob_L_examples():
    assert prob_L_ge(MultisetSpec((2, 3)), 1) == 1
    assert prob_L_ge(MultisetSpec((2, 2, 2)), 3) == F(47, 90)
    with pytest.raises(DomainError):
        prob_L_ge(MultisetSpec((2, 2)), 3)
    with pytest.raises(DomainError):
        prob_L_ge(MultisetSpec((2, 2)), 0)


def test_prob_L_against_clock_simulation():
    spec = MultisetSpec((2, 3))
    T = 10**6
    batch = simulate_batch(spec, seed=21, trials=T, workers=4)
    p_hat = float(np.mean(batch.run_length >= 2))
    exact = float(prob_L_ge(spec, 2))
    sigma = (exact * (1 - exact) / T) ** 0.5
    assert abs(p_hat - exact) <= 3 * sigma


def test_count_without_factorial_weights_is_wrong():
    # the variant (-1)^M sum C(M, j) c_j / j! is off by (j!)^2 termwise
    spec = MultisetSpec((2, 2))
    M = spec.M
    p = RationalPolynomial([1])
    for m in spec.multiplicities:
        p = p * _exp_poly_neg(m - 1)
    c = [(-1) ** spec.n * a for a in p.coeffs]
    variant = (-1) ** M * sum(comb(M, j) * cj / factorial(j) for j, cj in enumerate(c))
    assert variant != 5
    assert complete_count(spec) == 5
